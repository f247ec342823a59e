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

#include "splitpub/schedule.h"

#include <cmath>

#include "splitpub/errors.h"

namespace splitpub {

std::size_t ScheduleInterval(std::size_t delta_t0, std::size_t t) {
  if (delta_t0 == 0) throw ConfigError("delta_t0 must be at least 1");
  if (t == 0) throw ConfigError("schedule epochs are 1-based");
  const double d = static_cast<double>(delta_t0);
  const double half = d / 2.0;
  const double v =
      half * std::tanh(2.0 * static_cast<double>(t) / d - 2.0) + half;
  return static_cast<std::size_t>(std::ceil(v));
}

SyncSchedule SyncSchedule::SemiAsync(std::size_t delta_t0) {
  if (delta_t0 == 0) throw ConfigError("delta_t0 must be at least 1");
  return SyncSchedule(true, delta_t0);
}

SyncSchedule SyncSchedule::Fixed(std::size_t period) {
  if (period == 0) throw ConfigError("sync period must be at least 1");
  return SyncSchedule(false, period);
}

std::size_t SyncSchedule::Interval(std::size_t t) const {
  return semi_async_ ? ScheduleInterval(period_, t) : period_;
}

std::vector<std::size_t> SyncSchedule::SyncEpochs(std::size_t last) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= last; ++t) {
    if (ShouldSync(t)) out.push_back(t);
  }
  return out;
}

}  // namespace splitpub
