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

#include "splitpub/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "splitpub/errors.h"

namespace splitpub {
namespace {

using nlohmann::ordered_json;

void CheckColumn(const Matrix& predictions, const Matrix& labels) {
  if (predictions.cols() != 1 || labels.cols() != 1 ||
      predictions.rows() != labels.rows()) {
    throw ConfigError("metric inputs must be matching n x 1 columns");
  }
  if (predictions.rows() == 0) throw ConfigError("metric over zero rows");
}

ordered_json Number(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace

double RocAuc(const Matrix& scores, const Matrix& labels) {
  CheckColumn(scores, labels);
  const std::size_t n = scores.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(a, 0) < scores(b, 0);
  });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores(order[j], 0) == scores(order[i], 0)) ++j;
    // Ranks i+1..j share their mean.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels(order[k], 0) == 1.0) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ConfigError("AUC needs both classes in the labels");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

double Rmse(const Matrix& predictions, const Matrix& labels) {
  CheckColumn(predictions, labels);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.rows(); ++i) {
    const double e = predictions(i, 0) - labels(i, 0);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predictions.rows()));
}

double TestMetric(Task task, const Matrix& predictions, const Matrix& labels) {
  return task == Task::kClassification ? RocAuc(predictions, labels)
                                       : Rmse(predictions, labels);
}

bool MeetsTarget(Task task, double value, double target) {
  if (!std::isfinite(value)) return false;
  return task == Task::kClassification ? value >= target : value <= target;
}

void Summarize(RunMetrics& metrics, Task task) {
  RunSummary& s = metrics.summary;
  s.task = TaskName(task);
  s.epochs_run = metrics.epochs.size();
  s.total_wall_seconds = 0.0;
  s.total_skipped = 0;
  s.total_retries = 0;
  s.total_evictions = 0;
  s.time_to_target_seconds.reset();
  double wait = 0.0;
  double busy = 0.0;
  for (const EpochMetrics& e : metrics.epochs) {
    s.total_wall_seconds += e.wall_seconds;
    s.total_skipped += e.batches_skipped;
    s.total_retries += e.retries;
    s.total_evictions += e.evictions;
    wait += e.total_wait_seconds;
    busy += e.busy_fraction;
    if (!s.time_to_target_seconds &&
        MeetsTarget(task, e.test_metric, s.target_metric)) {
      s.time_to_target_seconds = s.total_wall_seconds;
    }
  }
  if (metrics.epochs.empty()) return;
  const double n = static_cast<double>(metrics.epochs.size());
  s.mean_wait_seconds_per_epoch = wait / n;
  s.mean_busy_fraction = busy / n;
  s.final_train_loss = metrics.epochs.back().mean_train_loss;
  s.final_test_metric = metrics.epochs.back().test_metric;
  s.total_bytes = metrics.epochs.back().bytes_published;
}

std::string EpochJson(const EpochMetrics& m) {
  ordered_json j;
  j["epoch"] = m.epoch;
  j["wall_seconds"] = Number(m.wall_seconds);
  j["mean_train_loss"] = Number(m.mean_train_loss);
  j["test_metric"] = Number(m.test_metric);
  j["total_wait_seconds"] = Number(m.total_wait_seconds);
  j["busy_fraction"] = Number(m.busy_fraction);
  j["bytes_published"] = m.bytes_published;
  j["batches_completed"] = m.batches_completed;
  j["batches_skipped"] = m.batches_skipped;
  j["retries"] = m.retries;
  j["evictions"] = m.evictions;
  j["sync_performed"] = m.sync_performed;
  return j.dump();
}

std::string SummaryJson(const RunSummary& s) {
  ordered_json j;
  j["mode"] = s.mode;
  j["task"] = s.task;
  j["epochs_run"] = s.epochs_run;
  j["stopped_early"] = s.stopped_early;
  j["total_wall_seconds"] = Number(s.total_wall_seconds);
  j["final_train_loss"] = Number(s.final_train_loss);
  j["final_test_metric"] = Number(s.final_test_metric);
  j["mean_wait_seconds_per_epoch"] = Number(s.mean_wait_seconds_per_epoch);
  j["mean_busy_fraction"] = Number(s.mean_busy_fraction);
  j["total_bytes"] = s.total_bytes;
  j["total_skipped"] = s.total_skipped;
  j["total_retries"] = s.total_retries;
  j["total_evictions"] = s.total_evictions;
  j["target_metric"] = Number(s.target_metric);
  j["time_to_target_seconds"] = s.time_to_target_seconds
                                    ? Number(*s.time_to_target_seconds)
                                    : ordered_json(nullptr);
  j["sigma_dp"] = Number(s.sigma_dp);
  return j.dump();
}

void WriteMetricsJsonl(const std::string& path, const RunMetrics& metrics) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metrics file " + path);
  for (const EpochMetrics& e : metrics.epochs) out << EpochJson(e) << '\n';
  out << "{\"summary\":" << SummaryJson(metrics.summary) << "}\n";
  if (!out) throw ConfigError("failed writing metrics file " + path);
}

}  // namespace splitpub
