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

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "splitpub/errors.h"
#include "splitpub/party_runtime.h"

namespace splitpub {
namespace {

double Seconds(Clock::duration d) {
  return std::chrono::duration<double>(d).count();
}

void CheckDatasets(const VerticalDataset& train, const VerticalDataset& test,
                   const TrainConfig& config) {
  if (train.n() == 0) throw ConfigError("training set is empty");
  if (train.active_features.rows() != train.n() ||
      train.passive_features.rows() != train.n()) {
    throw ConfigError("training parties disagree on the sample count");
  }
  if (train.active_dim() == 0 || train.passive_dim() == 0) {
    throw ConfigError("both parties need at least one feature");
  }
  if (test.n() > 0 && (test.active_dim() != train.active_dim() ||
                       test.passive_dim() != train.passive_dim())) {
    throw ConfigError("test features do not match the training split");
  }
  if (config.batch_size > train.n()) {
    throw ConfigError("batch_size " + std::to_string(config.batch_size) +
                      " exceeds the " + std::to_string(train.n()) +
                      " training samples");
  }
}

std::vector<WorkQueue> MakeQueues(std::size_t batches, std::size_t workers,
                                  bool shared) {
  std::vector<WorkQueue> out(shared ? 1 : workers);
  for (std::size_t b = 0; b < batches; ++b) out[b % out.size()].Push({b, 0});
  return out;
}

Matrix Evaluate(const std::vector<MlpModel>& active,
                const std::vector<MlpModel>& passive,
                const VerticalDataset& data) {
  return Predict(active[1],
                 ConcatColumns(Predict(active[0], data.active_features),
                               Predict(passive[0], data.passive_features)));
}

}  // namespace

TrainResult RunTraining(const VerticalDataset& train,
                        const VerticalDataset& test,
                        const TrainConfig& config) {
  config.Validate();
  CheckDatasets(train, test, config);
  const ModeTraits traits = ResolveMode(config);
  const std::size_t n = train.n();
  const std::size_t batches = ChannelCountFor(n, config.batch_size);

  const SplitModels init =
      CreateSplitModels(config.arch, train.active_dim(), train.passive_dim(),
                        train.task, config.seed);
  ParameterServer active_ps{{init.bottom_active, init.top}};
  ParameterServer passive_ps{{init.bottom_passive}};

  GdpConfig gdp;
  gdp.mu = config.mu;
  gdp.minibatch_size = config.batch_size;
  gdp.whole_batch_size = n;
  gdp.num_queries = config.dp_queries ? config.dp_queries : config.epochs * batches;
  gdp.scale_constant = config.dp_scale;
  gdp.seed = config.seed;
  const double sigma = CalibrateSigma(gdp);

  std::vector<WorkerState> active(config.workers_active);
  for (std::size_t k = 0; k < active.size(); ++k) {
    active[k].id = k;
    active[k].models = active_ps.models;
    active[k].compute_skew = config.skew_active;
  }
  std::vector<WorkerState> passive(config.workers_passive);
  for (std::size_t k = 0; k < passive.size(); ++k) {
    passive[k].id = k;
    passive[k].models = passive_ps.models;
    passive[k].compute_skew = config.skew_passive;
    passive[k].noise.emplace(sigma, WorkerNoiseSeed(config.seed, k));
  }

  Broker broker({batches, traits.embedding_capacity, traits.gradient_capacity});
  const SyncSchedule schedule = traits.semi_async
                                    ? SyncSchedule::SemiAsync(config.delta_t0)
                                    : SyncSchedule::Fixed(1);
  StepParams params;
  params.learning_rate = config.learning_rate;
  params.deadline = config.deadline;
  params.max_staleness = config.max_staleness;

  TrainResult result;
  result.sigma_dp = sigma;
  RunMetrics& metrics = result.metrics;
  metrics.summary.mode = ModeName(config.mode);
  metrics.summary.target_metric = config.target_metric;
  metrics.summary.sigma_dp = sigma;
  std::uint64_t evicted_before = 0;

  for (std::size_t t = 1; t <= config.epochs; ++t) {
    const BatchPlan plan =
        MakeBatchPlan(n, config.batch_size, EpochShuffleSeed(config.seed, t));
    const EpochContext actx{&train.active_features, &train.labels, &plan, t,
                            train.task};
    const EpochContext pctx{&train.passive_features, nullptr, &plan, t,
                            train.task};
    std::vector<WorkQueue> aqueues =
        MakeQueues(batches, active.size(), traits.shared_queue);
    std::vector<WorkQueue> pqueues =
        MakeQueues(batches, passive.size(), traits.shared_queue);
    auto queue_for = [&](std::vector<WorkQueue>& qs, std::size_t k) -> WorkQueue& {
      return qs.size() == 1 ? qs[0] : qs[k];
    };

    std::vector<PartyEpochStats> astats(active.size());
    std::vector<PartyEpochStats> pstats(passive.size());
    std::mutex error_mu;
    std::exception_ptr error;
    auto guarded = [&](auto&& body) {
      try {
        body();
      } catch (...) {
        {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
        broker.Cancel();
      }
    };

    const Clock::time_point start = Clock::now();
    std::vector<std::thread> threads;
    threads.reserve(active.size() + passive.size());
    for (std::size_t k = 0; k < passive.size(); ++k) {
      threads.emplace_back([&, k] {
        guarded([&] {
          pstats[k] = RunPassiveWorker(passive[k], queue_for(pqueues, k), pctx,
                                       broker, params, traits.max_inflight,
                                       config.max_retries);
        });
      });
    }
    for (std::size_t k = 0; k < active.size(); ++k) {
      threads.emplace_back([&, k] {
        guarded([&] {
          astats[k] = RunActiveWorker(active[k], queue_for(aqueues, k), actx,
                                      broker, params, config.max_retries);
        });
      });
    }
    for (std::thread& th : threads) th.join();
    const double wall = Seconds(Clock::now() - start);
    if (error) std::rethrow_exception(error);
    broker.DrainAll();

    PartyEpochStats a;
    for (const PartyEpochStats& s : astats) a.Merge(s);
    PartyEpochStats p;
    for (const PartyEpochStats& s : pstats) p.Merge(s);

    std::vector<double> loss(batches, 0.0);
    std::vector<std::size_t> rows(batches, 0);
    for (const StepResult& r : a.steps) {
      if (r.outcome != StepOutcome::kCompleted) continue;
      loss[r.batch_id] = r.loss;
      rows[r.batch_id] = r.rows;
    }
    double loss_sum = 0.0;
    std::size_t row_sum = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      if (rows[b] == 0) continue;
      loss_sum += loss[b] * static_cast<double>(rows[b]);
      row_sum += rows[b];
    }

    const AggregationReport sync = PsAggregate(active_ps, active, t, schedule);
    PsAggregate(passive_ps, passive, t, schedule);
    active_ps.pushes += a.completed;
    passive_ps.pushes += p.completed;

    EpochMetrics m;
    m.epoch = t;
    m.wall_seconds = wall;
    m.mean_train_loss = row_sum ? loss_sum / static_cast<double>(row_sum)
                                : std::numeric_limits<double>::quiet_NaN();
    m.test_metric = std::numeric_limits<double>::quiet_NaN();
    if (test.n() > 0) {
      const std::vector<MlpModel> amodels = AverageReplicas(active);
      const std::vector<MlpModel> pmodels = AverageReplicas(passive);
      m.test_metric =
          TestMetric(test.task, Evaluate(amodels, pmodels, test), test.labels);
    }
    m.total_wait_seconds = a.wait_seconds + p.wait_seconds;
    const double worker_wall = a.worker_wall_seconds + p.worker_wall_seconds;
    m.busy_fraction =
        worker_wall > 0.0
            ? std::clamp((a.busy_seconds + p.busy_seconds) / worker_wall, 0.0, 1.0)
            : 0.0;
    const BrokerStats bs = broker.stats();
    m.bytes_published = bs.bytes_published;
    m.batches_completed = a.completed;
    m.batches_skipped = a.skipped;
    m.retries = a.retries + p.retries;
    m.evictions = bs.evicted() - evicted_before;
    evicted_before = bs.evicted();
    m.sync_performed = sync.synchronized;
    metrics.epochs.push_back(m);

    if (std::isfinite(m.mean_train_loss) &&
        m.mean_train_loss <= config.loss_tolerance) {
      metrics.summary.stopped_early = t < config.epochs;
      break;
    }
  }

  const std::vector<MlpModel> amodels = AverageReplicas(active);
  const std::vector<MlpModel> pmodels = AverageReplicas(passive);
  result.models = {amodels[0], amodels[1], pmodels[0]};
  result.broker = broker.stats();
  Summarize(metrics, train.task);
  return result;
}

TrainResult RunBaselineMode(const VerticalDataset& train,
                            const VerticalDataset& test,
                            const TrainConfig& config) {
  if (config.mode == Mode::kPubSubVfl) {
    throw ConfigError("RunBaselineMode takes one of the four comparison modes");
  }
  return RunTraining(train, test, config);
}

}  // namespace splitpub
