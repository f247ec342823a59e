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

#include <stdexcept>
#include <string>

namespace splitpub {

// Invalid shapes, out-of-range knobs, malformed config or input files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Training could not continue (non-finite loss, alignment violation).
class TrainingAbort : public std::runtime_error {
 public:
  explicit TrainingAbort(const std::string& what) : std::runtime_error(what) {}
};

// The planner found no feasible configuration.
class InfeasiblePlan : public std::runtime_error {
 public:
  explicit InfeasiblePlan(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace splitpub
