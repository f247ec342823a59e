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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitpub/datasets.h"
#include "splitpub/tensor.h"

namespace splitpub {

// Area under the ROC curve from n x 1 scores and {0,1} labels, via the rank
// statistic with tied scores sharing their average rank. Throws ConfigError
// when either class is absent.
double RocAuc(const Matrix& scores, const Matrix& labels);
double Rmse(const Matrix& predictions, const Matrix& labels);
// AUC for classification, RMSE for regression.
double TestMetric(Task task, const Matrix& predictions, const Matrix& labels);
// True when `value` meets `target` (>= for AUC, <= for RMSE).
bool MeetsTarget(Task task, double value, double target);

struct EpochMetrics {
  std::size_t epoch = 0;
  double wall_seconds = 0.0;
  double mean_train_loss = 0.0;
  double test_metric = 0.0;
  double total_wait_seconds = 0.0;
  double busy_fraction = 0.0;
  std::uint64_t bytes_published = 0;  // cumulative
  std::size_t batches_completed = 0;
  std::size_t batches_skipped = 0;
  std::size_t retries = 0;
  std::uint64_t evictions = 0;
  bool sync_performed = false;
};

struct RunSummary {
  std::string mode;
  std::string task;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
  double total_wall_seconds = 0.0;
  double final_train_loss = 0.0;
  double final_test_metric = 0.0;
  double mean_wait_seconds_per_epoch = 0.0;
  double mean_busy_fraction = 0.0;
  std::uint64_t total_bytes = 0;
  std::size_t total_skipped = 0;
  std::size_t total_retries = 0;
  std::uint64_t total_evictions = 0;
  double target_metric = 0.0;
  // Cumulative training wall time at the first epoch meeting the target.
  std::optional<double> time_to_target_seconds;
  double sigma_dp = 0.0;
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;
  RunSummary summary;
};

// Fills everything in `summary` derivable from the epochs.
void Summarize(RunMetrics& metrics, Task task);

// One JSON object, no trailing newline. Non-finite numbers become null.
std::string EpochJson(const EpochMetrics& m);
std::string SummaryJson(const RunSummary& s);
// One line per epoch followed by {"summary": ...}.
void WriteMetricsJsonl(const std::string& path, const RunMetrics& metrics);

}  // namespace splitpub
