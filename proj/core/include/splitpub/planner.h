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
#include <vector>

#include "splitpub/kv_file.h"
#include "splitpub/profiler.h"

namespace splitpub {

// w_a ranges over [P..Q], w_p over [M..N], B over the candidate list.
struct SearchSpace {
  std::size_t wa_min = 2;  // P
  std::size_t wa_max = 50; // Q
  std::size_t wp_min = 2;  // M
  std::size_t wp_max = 50; // N
  std::vector<std::size_t> batch_sizes = {16, 32, 64, 128, 256, 512, 1024};
  // Let E and G grow with B instead of holding their measured values.
  bool scale_messages = false;

  // Throws ConfigError on empty ranges, zero values or no batch sizes.
  void Validate() const;
  std::size_t wa_count() const { return wa_max - wa_min + 1; }
  std::size_t wp_count() const { return wp_max - wp_min + 1; }
};

// Indices are 1-based: w_a = P + i - 1, w_p = M + j - 1, B = batch_sizes[r-1].
struct PlanState {
  std::size_t i = 0, j = 0, r = 0;
  std::size_t w_a = 0, w_p = 0, batch = 0;
  double cost = 0.0;
};

// Per-iteration delay: slower party's compute plus both transfers. Throws
// InfeasiblePlan when B exceeds the memory bound.
double IterationObjective(const DelayModelConstants& c, std::size_t w_a,
                          std::size_t w_p, std::size_t batch,
                          bool scale_messages = false);

// The compute-only state cost: the larger of the active branch
// (lambda_a B^gamma_a + lambda'_a B^gamma'_a + phi_a B^beta_a + phi'_a B^beta'_a)
// w_a / C_a and the passive branch (lambda_p B^gamma_p + phi_p B^beta_p)
// w_p / C_p.
double StateCost(const DelayModelConstants& c, const SearchSpace& space,
                 std::size_t i, std::size_t j, std::size_t r);

// Table-driven search over every feasible (i, j, r) with the per-B factors
// computed once. Returns the minimum objective; ties go to the smaller B,
// then the smaller w_a, then the smaller w_p.
PlanState DpSearch(const DelayModelConstants& c, const SearchSpace& space);
// Plain triple loop with the same objective and tie-break.
PlanState BruteForceSearch(const DelayModelConstants& c,
                           const SearchSpace& space);

KvFile ToKv(const PlanState& plan, double batch_bound);
PlanState PlanFromKv(const KvFile& kv);

}  // namespace splitpub
