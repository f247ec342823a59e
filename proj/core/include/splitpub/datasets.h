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
#include <span>
#include <string>
#include <vector>

#include "splitpub/tensor.h"

namespace splitpub {

enum class Task { kClassification, kRegression };

std::string TaskName(Task task);
Task ParseTask(const std::string& name);

// Row-aligned features and labels before the column split. Rows are assumed
// to be already aligned across parties by sample index.
struct LabeledData {
  Matrix features;
  Matrix labels;  // n x 1
  Task task = Task::kClassification;
  std::vector<std::string> feature_names;

  std::size_t n() const { return features.rows(); }
  std::size_t d() const { return features.cols(); }
};

struct SyntheticOptions {
  std::size_t n = 10000;
  std::size_t d = 50;
  std::size_t n_informative = 10;
  Task task = Task::kClassification;
  std::uint64_t seed = 0;
  // Half-distance between class centroids along each informative axis.
  double class_sep = 3.0;
  // Fraction of classification labels flipped at random.
  double flip_fraction = 0.05;
  // Std of additive Gaussian noise on regression targets.
  double target_noise = 0.1;
};

// Classification: two balanced Gaussian clusters placed at opposite vertices
// of a hypercube in the informative subspace; remaining columns are pure
// N(0, 1) noise. Regression: linear target over the informative columns
// plus Gaussian noise. Deterministic in `seed`.
LabeledData GenerateSynthetic(const SyntheticOptions& options);

// Reads a comma-separated file with a header row. `label_column` names the
// target; every other column becomes a feature, in file order. Parse errors
// name the 1-based data row (header excluded) and 1-based column.
LabeledData LoadCsv(const std::string& path, const std::string& label_column,
                    Task task);
// Writes features followed by the label column, full double precision.
void WriteCsv(const std::string& path, const LabeledData& data,
              const std::string& label_column = "label");

struct RowSplit {
  LabeledData train;
  LabeledData test;
};

// Seeded row shuffle, then the first round(train_fraction * n) rows train.
RowSplit SplitRows(const LabeledData& data, double train_fraction,
                   std::uint64_t seed);

struct ColumnSplit {
  std::vector<std::size_t> active;
  std::vector<std::size_t> passive;
};

// A seeded permutation of 0..d-1; the first d_a columns go to the active
// party. Requires 1 <= d_a <= d - 1.
ColumnSplit MakeColumnSplit(std::size_t d, std::size_t d_a, std::uint64_t seed);

// One party-split view of the data. Labels live with the active party.
struct VerticalDataset {
  Matrix active_features;
  Matrix passive_features;
  Matrix labels;
  Task task = Task::kClassification;

  std::size_t n() const { return labels.rows(); }
  std::size_t active_dim() const { return active_features.cols(); }
  std::size_t passive_dim() const { return passive_features.cols(); }
};

VerticalDataset ApplyColumnSplit(const LabeledData& data,
                                 const ColumnSplit& split);

// MakeColumnSplit + ApplyColumnSplit.
VerticalDataset VerticalSplit(const LabeledData& data, std::size_t d_a,
                              std::uint64_t seed);

// Per-column zero-mean / unit-variance scaling. Fitted on one party's
// training columns and applied to that party's train and test columns.
class Standardizer {
 public:
  static Standardizer Fit(const Matrix& m);
  void Apply(Matrix& m) const;

  std::span<const double> mean() const { return mean_; }
  std::span<const double> scale() const { return scale_; }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

// Standardizes both parties' features in place using train statistics.
void StandardizeParties(VerticalDataset& train, VerticalDataset& test);

struct BatchSpan {
  std::size_t batch_id = 0;
  std::size_t begin = 0;  // offset into BatchPlan::order
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const BatchSpan&, const BatchSpan&) = default;
};

// Assignment of samples to batch ids for one epoch. Both parties derive the
// same plan from the same (n, B, seed).
struct BatchPlan {
  std::size_t batch_size = 0;
  std::vector<std::size_t> order;  // permutation of 0..n-1
  std::vector<BatchSpan> batches;

  std::size_t batch_count() const { return batches.size(); }
  std::size_t sample_count() const { return order.size(); }
  std::span<const std::size_t> Indices(std::size_t batch_id) const;
};

// ceil(n / B) batches with ids 0..count-1; only the last may be short.
// Requires 1 <= B <= n.
BatchPlan MakeBatchPlan(std::size_t n, std::size_t batch_size,
                        std::uint64_t shuffle_seed);

// Seed of the epoch-`epoch` shuffle for a run seeded with `seed`.
std::uint64_t EpochShuffleSeed(std::uint64_t seed, std::size_t epoch);

}  // namespace splitpub
