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

#include "splitpub/planner.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "splitpub/errors.h"

namespace splitpub {
namespace {

double Objective(const PredictedTimes& t) {
  const double active = t.forward_active + t.backward_active + t.top_active;
  const double passive = t.forward_passive + t.backward_passive;
  return std::max(active, passive) + (t.embedding_transfer + t.gradient_transfer);
}

// Candidate positions (0-based) with B <= B_max, ascending by B.
std::vector<std::size_t> FeasibleOrder(const DelayModelConstants& c,
                                       const SearchSpace& space) {
  space.Validate();
  c.Validate();
  const double bound = MemoryBound(c);
  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < space.batch_sizes.size(); ++r) {
    if (static_cast<double>(space.batch_sizes[r]) <= bound) order.push_back(r);
  }
  if (order.empty()) {
    throw InfeasiblePlan("no candidate batch size fits the memory bound B_max = " +
                         FormatReal(bound));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return space.batch_sizes[a] < space.batch_sizes[b];
  });
  return order;
}

PlanState MakeState(const SearchSpace& space, std::size_t i, std::size_t j,
                    std::size_t r, double cost) {
  PlanState s;
  s.i = i;
  s.j = j;
  s.r = r;
  s.w_a = space.wa_min + i - 1;
  s.w_p = space.wp_min + j - 1;
  s.batch = space.batch_sizes[r - 1];
  s.cost = cost;
  return s;
}

}  // namespace

void SearchSpace::Validate() const {
  if (wa_min == 0 || wp_min == 0) throw ConfigError("worker counts start at 1");
  if (wa_min > wa_max) throw ConfigError("empty w_a range");
  if (wp_min > wp_max) throw ConfigError("empty w_p range");
  if (batch_sizes.empty()) throw ConfigError("no candidate batch sizes");
  for (std::size_t b : batch_sizes) {
    if (b == 0) throw ConfigError("candidate batch sizes must be at least 1");
  }
}

double IterationObjective(const DelayModelConstants& c, std::size_t w_a,
                          std::size_t w_p, std::size_t batch,
                          bool scale_messages) {
  c.Validate();
  const double bound = MemoryBound(c);
  if (static_cast<double>(batch) > bound) {
    throw InfeasiblePlan("batch size " + std::to_string(batch) +
                         " exceeds B_max = " + FormatReal(bound));
  }
  return Objective(PredictTimes(c, batch, w_a, w_p, scale_messages));
}

double StateCost(const DelayModelConstants& c, const SearchSpace& space,
                 std::size_t i, std::size_t j, std::size_t r) {
  space.Validate();
  if (i < 1 || i > space.wa_count() || j < 1 || j > space.wp_count() || r < 1 ||
      r > space.batch_sizes.size()) {
    throw ConfigError("state index out of range");
  }
  const double b = static_cast<double>(space.batch_sizes[r - 1]);
  if (b > MemoryBound(c)) throw InfeasiblePlan("state batch size exceeds B_max");
  const double wa = static_cast<double>(space.wa_min + i - 1);
  const double wp = static_cast<double>(space.wp_min + j - 1);
  const double active =
      (c.lambda_a * std::pow(b, c.gamma_a) +
       c.lambda_a_top * std::pow(b, c.gamma_a_top) +
       c.phi_a * std::pow(b, c.beta_a) +
       c.phi_a_top * std::pow(b, c.beta_a_top)) * wa / c.cores_active;
  const double passive =
      (c.lambda_p * std::pow(b, c.gamma_p) + c.phi_p * std::pow(b, c.beta_p)) *
      wp / c.cores_passive;
  return std::max(active, passive);
}

PlanState DpSearch(const DelayModelConstants& c, const SearchSpace& space) {
  const std::vector<std::size_t> order = FeasibleOrder(c, space);
  const std::size_t ni = space.wa_count();
  const std::size_t nj = space.wp_count();
  const std::size_t nr = space.batch_sizes.size();
  // dp[(r * ni + i) * nj + j], 0-based; infeasible r stay +inf.
  std::vector<double> dp(nr * ni * nj, INFINITY);
  for (std::size_t r : order) {
    const BatchFactors f = FactorsAt(c, space.batch_sizes[r], space.scale_messages);
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t j = 0; j < nj; ++j) {
        dp[(r * ni + i) * nj + j] =
            Objective(ScaleFactors(c, f, space.wa_min + i, space.wp_min + j));
      }
    }
  }
  PlanState best;
  best.cost = INFINITY;
  bool found = false;
  for (std::size_t r : order) {
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t j = 0; j < nj; ++j) {
        const double v = dp[(r * ni + i) * nj + j];
        if (!found || v < best.cost) {
          best = MakeState(space, i + 1, j + 1, r + 1, v);
          found = true;
        }
      }
    }
  }
  return best;
}

PlanState BruteForceSearch(const DelayModelConstants& c,
                           const SearchSpace& space) {
  const std::vector<std::size_t> order = FeasibleOrder(c, space);
  PlanState best;
  bool found = false;
  for (std::size_t r : order) {
    for (std::size_t wa = space.wa_min; wa <= space.wa_max; ++wa) {
      for (std::size_t wp = space.wp_min; wp <= space.wp_max; ++wp) {
        const double v = IterationObjective(c, wa, wp, space.batch_sizes[r],
                                            space.scale_messages);
        if (!found || v < best.cost) {
          best = MakeState(space, wa - space.wa_min + 1, wp - space.wp_min + 1,
                           r + 1, v);
          found = true;
        }
      }
    }
  }
  return best;
}

KvFile ToKv(const PlanState& plan, double batch_bound) {
  KvFile kv;
  kv.SetInt("workers_active", plan.w_a);
  kv.SetInt("workers_passive", plan.w_p);
  kv.SetInt("batch_size", plan.batch);
  kv.SetDouble("predicted_iteration_seconds", plan.cost);
  kv.SetDouble("batch_bound", batch_bound);
  return kv;
}

PlanState PlanFromKv(const KvFile& kv) {
  PlanState s;
  auto need = [&](const char* key) {
    auto v = kv.GetInt(key);
    if (!v) throw ConfigError(std::string("plan file lacks '") + key + "'");
    return static_cast<std::size_t>(*v);
  };
  s.w_a = need("workers_active");
  s.w_p = need("workers_passive");
  s.batch = need("batch_size");
  s.cost = kv.RequireDouble("predicted_iteration_seconds");
  return s;
}

}  // namespace splitpub
