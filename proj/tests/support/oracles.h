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
#include <vector>

#include "splitpub/datasets.h"
#include "splitpub/mlp.h"
#include "splitpub/party_runtime.h"
#include "splitpub/profiler.h"
#include "splitpub/tensor.h"

namespace splitpub::testing {

// Sequential split training in one process: per batch, f_p then f_a, concat,
// g, loss, backward through g, split the cut-layer gradient, backward through
// both bottoms, SGD on all three. Epoch loss is the sample-weighted mean in
// batch-id order.
struct OracleRun {
  std::vector<double> epoch_losses;
  SplitModels models;
};
OracleRun MonolithicSplitTraining(const VerticalDataset& train,
                                  const TrainConfig& config);

// One oracle step on one batch; returns d loss / d z_p and updates `models`.
struct OracleStep {
  double loss = 0.0;
  Matrix passive_gradient;
};
OracleStep MonolithicStep(SplitModels& models, const Matrix& xa,
                          const Matrix& xp, const Matrix& y, Task task,
                          double eta);

// Central finite differences of J = sum(R .* model(X)) against Backward.
struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};
GradCheck CheckGradients(const MlpModel& model, const Matrix& x,
                         const Matrix& r, double h = 1e-5);

// O(n^2) pair-counting AUC; ties count one half.
double PairCountAuc(const std::vector<double>& scores,
                    const std::vector<double>& labels);

// Explicit-loop dense layer stack, no library products.
Matrix LoopForward(const MlpModel& model, const Matrix& x);

Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                    double lo = -1.0, double hi = 1.0);

// Appendix constants of the reference deployment: 32 cores per party,
// 1 GB/s link, 1 MiB messages, memory roomy enough for every B <= 1024.
DelayModelConstants ReferenceConstants();

// Random positive coefficients, exponents in [-1.2, 0.6], cores and message
// sizes drawn wide, memory cap placing B_max somewhere in [8, 2048].
DelayModelConstants RandomConstants(std::uint64_t seed);

}  // namespace splitpub::testing
