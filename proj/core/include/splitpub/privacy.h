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
#include <limits>

#include "splitpub/rng.h"
#include "splitpub/tensor.h"

namespace splitpub {

inline constexpr double kMuDisabled = std::numeric_limits<double>::infinity();

struct GdpConfig {
  // Privacy loss parameter; infinity disables noise.
  double mu = kMuDisabled;
  std::size_t minibatch_size = 1;    // N_m
  std::size_t whole_batch_size = 1;  // N
  std::size_t num_queries = 1;       // K
  // The constant hidden by the O() in the calibration bound.
  double scale_constant = 1.0;
  // Recorded for reporting; never used in calibration.
  double delta = 1e-5;
  std::uint64_t seed = 0;

  bool enabled() const { return mu != kMuDisabled; }
  // Throws ConfigError unless mu > 0 (or infinite), 1 <= N_m <= N, K >= 1 and
  // scale_constant > 0.
  void Validate() const;
};

// sigma = c * N_m * sqrt(K) / (mu * N); zero when mu is infinite.
double CalibrateSigma(const GdpConfig& config);

// Running moments of every noise sample drawn (Welford).
struct NoiseReport {
  double sigma_dp = 0.0;
  std::uint64_t samples_drawn = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Record(double x);
  double variance() const;
  double stddev() const;
};

// A worker's private Gaussian noise source. The stream is a pure function of
// the seed: mt19937_64 seeded with `seed`, mapped to normals by Box-Muller.
class NoiseStream {
 public:
  NoiseStream(double sigma_dp, std::uint64_t seed);

  // Returns input + N(0, sigma^2) per entry. With sigma == 0 the input is
  // returned unchanged and no randomness is consumed.
  Matrix AddNoise(const Matrix& input);

  double sigma() const { return report_.sigma_dp; }
  const NoiseReport& report() const { return report_; }

 private:
  Engine engine_;
  NormalSampler normal_;
  NoiseReport report_;
};

// One-shot form of NoiseStream::AddNoise. Throws ConfigError for a negative
// or non-finite sigma.
Matrix AddNoise(const Matrix& input, double sigma_dp, Engine& engine);

// Noise seed of worker `worker_id` in a run seeded with `run_seed`.
inline std::uint64_t WorkerNoiseSeed(std::uint64_t run_seed,
                                     std::uint64_t worker_id) {
  return run_seed ^ worker_id;
}

}  // namespace splitpub
