// Copyright 2026 The splitpub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitpub/broker.h"
#include "splitpub/datasets.h"
#include "splitpub/metrics.h"
#include "splitpub/mlp.h"
#include "splitpub/privacy.h"
#include "splitpub/schedule.h"

namespace splitpub {

enum class Mode { kPubSubVfl, kPureVfl, kVflPs, kAvfl, kAvflPs };

std::string ModeName(Mode mode);
// Accepts the canonical names (PubSubVFL, PureVFL, VFL_PS, AVFL, AVFL_PS)
// case-insensitively, with '-' and '_' interchangeable.
Mode ParseMode(const std::string& name);
std::vector<Mode> AllModes();

// Layer widths of the three split models. Both bottom models share the
// hidden widths and the embedding width.
struct SplitArchitecture {
  std::vector<std::size_t> bottom_hidden = {32};
  std::size_t embed_dim = 512;
  std::vector<std::size_t> top_hidden = {256};
};

// f_a and g belong to the active party, f_p to the passive party.
struct SplitModels {
  MlpModel bottom_active;
  MlpModel top;
  MlpModel bottom_passive;
};

// Each model is seeded from its own stream of `seed`.
SplitModels CreateSplitModels(const SplitArchitecture& arch,
                              std::size_t active_dim, std::size_t passive_dim,
                              Task task, std::uint64_t seed);

struct TrainConfig {
  Mode mode = Mode::kPubSubVfl;
  std::size_t batch_size = 256;
  std::size_t workers_active = 4;
  std::size_t workers_passive = 4;
  double learning_rate = 0.001;
  std::size_t epochs = 20;
  std::size_t delta_t0 = 5;
  std::chrono::milliseconds deadline{10000};
  std::size_t embedding_capacity = 5;  // p
  std::size_t gradient_capacity = 5;   // q
  // Privacy. num_queries == 0 means epochs * batches per epoch.
  double mu = kMuDisabled;
  double dp_scale = 1.0;
  std::size_t dp_queries = 0;
  // Stop once the epoch-mean training loss is at or below this.
  double loss_tolerance = 0.0;
  std::uint64_t seed = 0;
  // Artificial per-batch compute delay of each party.
  std::chrono::microseconds skew_active{0};
  std::chrono::microseconds skew_passive{0};
  // Deadline-skipped batches are retried this many times per epoch.
  std::size_t max_retries = 1;
  // Embeddings a passive worker may have awaiting gradients. 0 picks the
  // mode default.
  std::size_t max_inflight = 0;
  // Passive workers drop gradients whose embedding was produced more than
  // this many local updates ago. Off when empty.
  std::optional<std::uint64_t> max_staleness;
  SplitArchitecture arch;
  // Test metric threshold for time-to-target (AUC, or RMSE for regression).
  double target_metric = 0.91;

  // Throws ConfigError on out-of-range values and on worker counts the mode
  // does not allow.
  void Validate() const;
};

// Mode-derived execution parameters.
struct ModeTraits {
  bool shared_queue = true;      // work stealing vs static batch ownership
  bool single_pair = false;      // one worker per party
  std::size_t embedding_capacity = 5;
  std::size_t gradient_capacity = 5;
  std::size_t max_inflight = 1;
  bool semi_async = false;       // tanh schedule vs every-epoch sync
};

ModeTraits ResolveMode(const TrainConfig& config);

enum class StepOutcome { kCompleted, kSkippedDeadline, kCancelled };

const char* StepOutcomeName(StepOutcome outcome);

// One worker's private state. Passive workers hold {f_p}; active workers
// hold {f_a, g}.
struct WorkerState {
  std::size_t id = 0;
  std::vector<MlpModel> models;
  Clock::duration compute_skew{};
  std::optional<NoiseStream> noise;
};

// Read-only view of the data one party sees during one epoch.
struct EpochContext {
  const Matrix* features = nullptr;
  const Matrix* labels = nullptr;  // active party only
  const BatchPlan* plan = nullptr;
  std::size_t epoch = 0;
  Task task = Task::kClassification;

  SampleRange Range(std::size_t batch_id) const;
};

struct StepParams {
  double learning_rate = 0.001;
  Clock::duration deadline = std::chrono::seconds(10);
  std::optional<std::uint64_t> max_staleness;
};

struct StepResult {
  std::size_t batch_id = 0;
  StepOutcome outcome = StepOutcome::kCompleted;
  Clock::duration waited{};
  Clock::duration busy{};
  double loss = std::numeric_limits<double>::quiet_NaN();  // active only
  std::size_t rows = 0;
};

// An embedding published by a passive worker and awaiting its gradient.
struct InflightBatch {
  std::size_t batch_id = 0;
  SampleRange range;
  MlpModel snapshot;  // f_p as it was at forward time
  ForwardTape tape;
  std::uint64_t version = 0;
  Clock::duration busy{};
};

// Passive forward: f_p on the batch, noise, publish to the embedding channel.
InflightBatch PassivePublish(WorkerState& worker, const EpochContext& ctx,
                             std::size_t batch_id, Broker& broker);
// Waits for the batch's gradient, then backpropagates through the snapshot
// and applies SGD to the worker's current f_p.
StepResult PassiveComplete(WorkerState& worker, InflightBatch& inflight,
                           const EpochContext& ctx, Broker& broker,
                           const StepParams& params);
// PassivePublish followed by PassiveComplete.
StepResult PassiveWorkerStep(WorkerState& worker, const EpochContext& ctx,
                             std::size_t batch_id, Broker& broker,
                             const StepParams& params);

// Waits for the batch's embedding, runs f_a and g, publishes the cut-layer
// gradient and applies SGD to f_a and g.
StepResult ActiveWorkerStep(WorkerState& worker, const EpochContext& ctx,
                            std::size_t batch_id, Broker& broker,
                            const StepParams& params);

struct WorkTicket {
  std::size_t batch_id = 0;
  std::size_t attempt = 0;
};

// A party's pending batches. Thread-safe.
class WorkQueue {
 public:
  WorkQueue() = default;
  explicit WorkQueue(std::span<const std::size_t> batch_ids);

  std::optional<WorkTicket> Pop();
  void Push(WorkTicket ticket);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::deque<WorkTicket> queue_;
};

// Per-party accounting of one epoch.
struct PartyEpochStats {
  std::size_t completed = 0;
  std::size_t skipped = 0;
  std::size_t retries = 0;
  double wait_seconds = 0.0;
  double busy_seconds = 0.0;
  double worker_wall_seconds = 0.0;
  std::vector<StepResult> steps;

  void Merge(const PartyEpochStats& other);
};

// Runs one passive worker until its queue is empty. Keeps up to
// `max_inflight` embeddings outstanding.
PartyEpochStats RunPassiveWorker(WorkerState& worker, WorkQueue& queue,
                                 const EpochContext& ctx, Broker& broker,
                                 const StepParams& params,
                                 std::size_t max_inflight,
                                 std::size_t max_retries);
PartyEpochStats RunActiveWorker(WorkerState& worker, WorkQueue& queue,
                                const EpochContext& ctx, Broker& broker,
                                const StepParams& params,
                                std::size_t max_retries);

struct ParameterServer {
  std::vector<MlpModel> models;
  std::uint64_t pushes = 0;
  std::uint64_t syncs = 0;
};

struct AggregationReport {
  std::size_t epoch = 0;
  std::size_t interval = 0;
  bool synchronized = false;
};

// At epochs where t mod interval(t) == 0 the server takes the elementwise
// mean of the replicas and broadcasts it back; otherwise nothing changes.
AggregationReport PsAggregate(ParameterServer& ps,
                              std::span<WorkerState> workers, std::size_t t,
                              const SyncSchedule& schedule);

// Elementwise mean of the workers' replicas, slot by slot.
std::vector<MlpModel> AverageReplicas(std::span<const WorkerState> workers);

struct TrainResult {
  SplitModels models;
  RunMetrics metrics;
  BrokerStats broker;
  double sigma_dp = 0.0;
};

// Trains on `train` and evaluates on `test` after every epoch.
TrainResult RunTraining(const VerticalDataset& train,
                        const VerticalDataset& test, const TrainConfig& config);
// RunTraining restricted to the four comparison modes.
TrainResult RunBaselineMode(const VerticalDataset& train,
                            const VerticalDataset& test,
                            const TrainConfig& config);

}  // namespace splitpub
