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

namespace splitpub {

// ceil((dt0 / 2) * tanh(2t / dt0 - 2) + dt0 / 2). Requires dt0 >= 1, t >= 1.
std::size_t ScheduleInterval(std::size_t delta_t0, std::size_t t);

// Decides at which epochs (1-based) the parameter servers synchronize.
class SyncSchedule {
 public:
  // Tanh-growing interval starting from delta_t0.
  static SyncSchedule SemiAsync(std::size_t delta_t0);
  // Synchronize every `period` epochs.
  static SyncSchedule Fixed(std::size_t period);

  std::size_t Interval(std::size_t t) const;
  bool ShouldSync(std::size_t t) const { return t % Interval(t) == 0; }
  // Sync epochs among 1..last.
  std::vector<std::size_t> SyncEpochs(std::size_t last) const;

  bool semi_async() const { return semi_async_; }
  std::size_t period() const { return period_; }

 private:
  SyncSchedule(bool semi_async, std::size_t period)
      : semi_async_(semi_async), period_(period) {}

  bool semi_async_;
  std::size_t period_;
};

}  // namespace splitpub
