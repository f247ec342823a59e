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

#include "splitpub/party_runtime.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <thread>

#include "splitpub/errors.h"
#include "splitpub/rng.h"

namespace splitpub {
namespace {

double Seconds(Clock::duration d) {
  return std::chrono::duration<double>(d).count();
}

void Sleep(Clock::duration d) {
  if (d > Clock::duration::zero()) std::this_thread::sleep_for(d);
}

std::string Normalize(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string RangeText(const SampleRange& r) {
  return "[" + std::to_string(r.begin) + ", " + std::to_string(r.end) + ")";
}

void CheckAlignment(const ChannelMessage& m, std::size_t epoch,
                    const SampleRange& expected) {
  if (m.epoch != epoch || m.sample_range != expected) {
    throw TrainingAbort(
        std::string("alignment violation on batch ") +
        std::to_string(m.batch_id) + ": received " + MessageKindName(m.kind) +
        " for epoch " + std::to_string(m.epoch) + " samples " +
        RangeText(m.sample_range) + ", expected epoch " +
        std::to_string(epoch) + " samples " + RangeText(expected));
  }
}

void Account(PartyEpochStats& stats, const StepResult& r,
             const WorkTicket& ticket, WorkQueue& queue,
             std::size_t max_retries) {
  stats.wait_seconds += Seconds(r.waited);
  stats.busy_seconds += Seconds(r.busy);
  switch (r.outcome) {
    case StepOutcome::kCompleted:
      ++stats.completed;
      break;
    case StepOutcome::kSkippedDeadline:
      if (ticket.attempt < max_retries) {
        ++stats.retries;
        queue.Push({ticket.batch_id, ticket.attempt + 1});
      } else {
        ++stats.skipped;
      }
      break;
    case StepOutcome::kCancelled:
      break;
  }
  stats.steps.push_back(r);
}

}  // namespace

std::string ModeName(Mode mode) {
  switch (mode) {
    case Mode::kPubSubVfl: return "PubSubVFL";
    case Mode::kPureVfl: return "PureVFL";
    case Mode::kVflPs: return "VFL_PS";
    case Mode::kAvfl: return "AVFL";
    case Mode::kAvflPs: return "AVFL_PS";
  }
  return "unknown";
}

Mode ParseMode(const std::string& name) {
  const std::string n = Normalize(name);
  if (n == "pubsubvfl" || n == "pubsub") return Mode::kPubSubVfl;
  if (n == "purevfl" || n == "vfl") return Mode::kPureVfl;
  if (n == "vflps") return Mode::kVflPs;
  if (n == "avfl") return Mode::kAvfl;
  if (n == "avflps") return Mode::kAvflPs;
  throw ConfigError("unknown mode '" + name +
                    "' (expected PubSubVFL, PureVFL, VFL_PS, AVFL or AVFL_PS)");
}

std::vector<Mode> AllModes() {
  return {Mode::kPubSubVfl, Mode::kPureVfl, Mode::kVflPs, Mode::kAvfl,
          Mode::kAvflPs};
}

SplitModels CreateSplitModels(const SplitArchitecture& arch,
                              std::size_t active_dim, std::size_t passive_dim,
                              Task task, std::uint64_t seed) {
  auto bottom_dims = [&](std::size_t in) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), arch.bottom_hidden.begin(), arch.bottom_hidden.end());
    dims.push_back(arch.embed_dim);
    return dims;
  };
  std::vector<std::size_t> top_dims{2 * arch.embed_dim};
  top_dims.insert(top_dims.end(), arch.top_hidden.begin(), arch.top_hidden.end());
  top_dims.push_back(1);
  const Activation out = task == Task::kClassification ? Activation::kSigmoid
                                                       : Activation::kIdentity;
  SplitModels m;
  m.bottom_active = MlpModel::Create(bottom_dims(active_dim), Activation::kReLU,
                                     Activation::kIdentity, DeriveSeed(seed, 101));
  m.top = MlpModel::Create(top_dims, Activation::kReLU, out, DeriveSeed(seed, 102));
  m.bottom_passive = MlpModel::Create(bottom_dims(passive_dim), Activation::kReLU,
                                      Activation::kIdentity, DeriveSeed(seed, 103));
  return m;
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (workers_active == 0 || workers_passive == 0) {
    throw ConfigError("each party needs at least one worker");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (delta_t0 == 0) throw ConfigError("delta_t0 must be at least 1");
  if (deadline.count() <= 0) throw ConfigError("deadline must be positive");
  if (embedding_capacity == 0 || gradient_capacity == 0) {
    throw ConfigError("channel capacities p and q must be at least 1");
  }
  if (!(mu > 0.0)) throw ConfigError("mu must be positive (or inf)");
  if (!(dp_scale > 0.0) || !std::isfinite(dp_scale)) {
    throw ConfigError("dp_scale must be positive and finite");
  }
  if (skew_active.count() < 0 || skew_passive.count() < 0) {
    throw ConfigError("compute skew must be non-negative");
  }
  if (arch.embed_dim == 0) throw ConfigError("embed_dim must be at least 1");
  for (std::size_t w : arch.bottom_hidden) {
    if (w == 0) throw ConfigError("bottom_hidden widths must be at least 1");
  }
  for (std::size_t w : arch.top_hidden) {
    if (w == 0) throw ConfigError("top_hidden widths must be at least 1");
  }
  const std::string name = ModeName(mode);
  if (mode == Mode::kPureVfl || mode == Mode::kAvfl) {
    if (workers_active != 1 || workers_passive != 1) {
      throw ConfigError(name + " runs a single worker pair; got w_a=" +
                        std::to_string(workers_active) +
                        ", w_p=" + std::to_string(workers_passive));
    }
  }
  if (mode == Mode::kVflPs || mode == Mode::kAvflPs) {
    if (workers_active != workers_passive) {
      throw ConfigError(name + " pairs workers statically and needs w_a == w_p");
    }
  }
  if ((mode == Mode::kPureVfl || mode == Mode::kVflPs) && max_inflight > 1) {
    throw ConfigError(name + " exchanges in lock step; max_inflight must be 1");
  }
}

ModeTraits ResolveMode(const TrainConfig& config) {
  ModeTraits t;
  t.embedding_capacity = config.embedding_capacity;
  t.gradient_capacity = config.gradient_capacity;
  std::size_t default_inflight = 1;
  switch (config.mode) {
    case Mode::kPubSubVfl:
      t.semi_async = true;
      default_inflight = config.workers_passive > 1 ? 2 : 1;
      break;
    case Mode::kPureVfl:
      t.single_pair = true;
      break;
    case Mode::kVflPs:
      t.shared_queue = false;
      break;
    case Mode::kAvfl:
      t.single_pair = true;
      t.embedding_capacity = t.gradient_capacity = 1;
      default_inflight = 2;
      break;
    case Mode::kAvflPs:
      t.shared_queue = false;
      t.embedding_capacity = t.gradient_capacity = 1;
      default_inflight = 2;
      break;
  }
  t.max_inflight = config.max_inflight ? config.max_inflight : default_inflight;
  return t;
}

const char* StepOutcomeName(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::kCompleted: return "completed";
    case StepOutcome::kSkippedDeadline: return "skipped_deadline";
    case StepOutcome::kCancelled: return "cancelled";
  }
  return "unknown";
}

SampleRange EpochContext::Range(std::size_t batch_id) const {
  const BatchSpan& span = plan->batches.at(batch_id);
  return {span.begin, span.end};
}

InflightBatch PassivePublish(WorkerState& worker, const EpochContext& ctx,
                             std::size_t batch_id, Broker& broker) {
  const Clock::time_point start = Clock::now();
  InflightBatch in;
  in.batch_id = batch_id;
  in.range = ctx.Range(batch_id);
  in.snapshot = worker.models.at(0);
  in.version = in.snapshot.version();
  ForwardResult fwd =
      Forward(in.snapshot, GatherRows(*ctx.features, ctx.plan->Indices(batch_id)));
  in.tape = std::move(fwd.tape);

  ChannelMessage m;
  m.batch_id = batch_id;
  m.kind = MessageKind::kEmbedding;
  m.sample_range = in.range;
  m.epoch = ctx.epoch;
  m.sender_worker = worker.id;
  m.param_version = in.version;
  if (worker.noise && worker.noise->sigma() > 0.0) {
    if (m.noise_applied) throw TrainingAbort("embedding noised twice");
    m.payload = worker.noise->AddNoise(fwd.output);
    m.noise_applied = true;
  } else {
    m.payload = std::move(fwd.output);
  }
  Sleep(worker.compute_skew / 2);
  in.busy = Clock::now() - start;
  broker.Publish(std::move(m));
  return in;
}

StepResult PassiveComplete(WorkerState& worker, InflightBatch& inflight,
                           const EpochContext& ctx, Broker& broker,
                           const StepParams& params) {
  StepResult res;
  res.batch_id = inflight.batch_id;
  res.rows = inflight.range.size();
  res.busy = inflight.busy;
  SubscribeOptions opts;
  if (params.max_staleness) {
    opts.max_staleness = params.max_staleness;
    opts.subscriber_version = worker.models.at(0).version();
  }
  SubscribeResult sub = broker.Subscribe(MessageKind::kGradient,
                                         inflight.batch_id, params.deadline, opts);
  res.waited = sub.waited;
  if (sub.cancelled) {
    res.outcome = StepOutcome::kCancelled;
    return res;
  }
  if (!sub.message) {
    res.outcome = StepOutcome::kSkippedDeadline;
    return res;
  }
  const Clock::time_point start = Clock::now();
  CheckAlignment(*sub.message, ctx.epoch, inflight.range);
  BackwardResult back =
      Backward(inflight.snapshot, inflight.tape, sub.message->payload);
  SgdStep(worker.models.at(0), back.grads, params.learning_rate);
  Sleep(worker.compute_skew - worker.compute_skew / 2);
  res.busy += Clock::now() - start;
  res.outcome = StepOutcome::kCompleted;
  return res;
}

StepResult PassiveWorkerStep(WorkerState& worker, const EpochContext& ctx,
                             std::size_t batch_id, Broker& broker,
                             const StepParams& params) {
  InflightBatch in = PassivePublish(worker, ctx, batch_id, broker);
  return PassiveComplete(worker, in, ctx, broker, params);
}

StepResult ActiveWorkerStep(WorkerState& worker, const EpochContext& ctx,
                            std::size_t batch_id, Broker& broker,
                            const StepParams& params) {
  StepResult res;
  res.batch_id = batch_id;
  const SampleRange range = ctx.Range(batch_id);
  res.rows = range.size();
  SubscribeResult sub =
      broker.Subscribe(MessageKind::kEmbedding, batch_id, params.deadline);
  res.waited = sub.waited;
  if (sub.cancelled) {
    res.outcome = StepOutcome::kCancelled;
    return res;
  }
  if (!sub.message) {
    res.outcome = StepOutcome::kSkippedDeadline;
    return res;
  }
  const Clock::time_point start = Clock::now();
  const ChannelMessage& emb = *sub.message;
  CheckAlignment(emb, ctx.epoch, range);

  MlpModel& bottom = worker.models.at(0);
  MlpModel& top = worker.models.at(1);
  const auto indices = ctx.plan->Indices(batch_id);
  ForwardResult fa;
  ForwardResult g;
  LossResult loss;
  try {
    fa = Forward(bottom, GatherRows(*ctx.features, indices));
    g = Forward(top, ConcatColumns(fa.output, emb.payload));
    const Matrix y = GatherRows(*ctx.labels, indices);
    loss = ctx.task == Task::kClassification ? CrossEntropyLoss(g.output, y)
                                             : MseLoss(g.output, y);
  } catch (const TrainingAbort& e) {
    throw TrainingAbort("epoch " + std::to_string(ctx.epoch) + ", batch " +
                        std::to_string(batch_id) + ": " + e.what());
  }
  if (!std::isfinite(loss.loss)) {
    throw TrainingAbort("non-finite training loss at epoch " +
                        std::to_string(ctx.epoch) + ", batch " +
                        std::to_string(batch_id));
  }
  BackwardResult gb = Backward(top, g.tape, loss.gradient);
  const std::size_t split = fa.output.cols();
  Matrix d_passive = SliceColumns(gb.input_grad, split, gb.input_grad.cols());
  BackwardResult ab =
      Backward(bottom, fa.tape, SliceColumns(gb.input_grad, 0, split));
  Sleep(worker.compute_skew);

  ChannelMessage m;
  m.batch_id = batch_id;
  m.kind = MessageKind::kGradient;
  m.payload = std::move(d_passive);
  m.sample_range = range;
  m.epoch = ctx.epoch;
  m.sender_worker = worker.id;
  m.param_version = emb.param_version;
  broker.Publish(std::move(m));

  SgdStep(top, gb.grads, params.learning_rate);
  SgdStep(bottom, ab.grads, params.learning_rate);
  res.busy = Clock::now() - start;
  res.loss = loss.loss;
  res.outcome = StepOutcome::kCompleted;
  return res;
}

WorkQueue::WorkQueue(std::span<const std::size_t> batch_ids) {
  for (std::size_t id : batch_ids) queue_.push_back({id, 0});
}

std::optional<WorkTicket> WorkQueue::Pop() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  WorkTicket t = queue_.front();
  queue_.pop_front();
  return t;
}

void WorkQueue::Push(WorkTicket ticket) {
  std::lock_guard lock(mu_);
  queue_.push_back(ticket);
}

std::size_t WorkQueue::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void PartyEpochStats::Merge(const PartyEpochStats& other) {
  completed += other.completed;
  skipped += other.skipped;
  retries += other.retries;
  wait_seconds += other.wait_seconds;
  busy_seconds += other.busy_seconds;
  worker_wall_seconds += other.worker_wall_seconds;
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
}

PartyEpochStats RunPassiveWorker(WorkerState& worker, WorkQueue& queue,
                                 const EpochContext& ctx, Broker& broker,
                                 const StepParams& params,
                                 std::size_t max_inflight,
                                 std::size_t max_retries) {
  if (max_inflight == 0) throw ConfigError("max_inflight must be at least 1");
  const Clock::time_point start = Clock::now();
  PartyEpochStats stats;
  std::deque<std::pair<WorkTicket, InflightBatch>> inflight;
  while (true) {
    if (inflight.size() < max_inflight) {
      if (std::optional<WorkTicket> t = queue.Pop()) {
        inflight.emplace_back(*t, PassivePublish(worker, ctx, t->batch_id, broker));
        continue;
      }
    }
    if (inflight.empty()) break;
    auto [ticket, batch] = std::move(inflight.front());
    inflight.pop_front();
    StepResult r = PassiveComplete(worker, batch, ctx, broker, params);
    Account(stats, r, ticket, queue, max_retries);
    if (r.outcome == StepOutcome::kCancelled) break;
  }
  stats.worker_wall_seconds = Seconds(Clock::now() - start);
  return stats;
}

PartyEpochStats RunActiveWorker(WorkerState& worker, WorkQueue& queue,
                                const EpochContext& ctx, Broker& broker,
                                const StepParams& params,
                                std::size_t max_retries) {
  const Clock::time_point start = Clock::now();
  PartyEpochStats stats;
  while (std::optional<WorkTicket> t = queue.Pop()) {
    StepResult r = ActiveWorkerStep(worker, ctx, t->batch_id, broker, params);
    Account(stats, r, *t, queue, max_retries);
    if (r.outcome == StepOutcome::kCancelled) break;
  }
  stats.worker_wall_seconds = Seconds(Clock::now() - start);
  return stats;
}

std::vector<MlpModel> AverageReplicas(std::span<const WorkerState> workers) {
  if (workers.empty()) throw ConfigError("no worker replicas to average");
  std::vector<MlpModel> out;
  for (std::size_t slot = 0; slot < workers[0].models.size(); ++slot) {
    std::vector<MlpModel> replicas;
    replicas.reserve(workers.size());
    for (const WorkerState& w : workers) replicas.push_back(w.models.at(slot));
    out.push_back(AverageModels(replicas));
  }
  return out;
}

AggregationReport PsAggregate(ParameterServer& ps,
                              std::span<WorkerState> workers, std::size_t t,
                              const SyncSchedule& schedule) {
  AggregationReport report;
  report.epoch = t;
  report.interval = schedule.Interval(t);
  if (t % report.interval != 0) return report;
  ps.models = AverageReplicas(workers);
  for (WorkerState& w : workers) w.models = ps.models;
  ++ps.syncs;
  report.synchronized = true;
  return report;
}

}  // namespace splitpub
