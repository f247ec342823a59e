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

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace splitpub {

// All randomness in the library is drawn from std::mt19937_64, whose output
// sequence is fixed by the standard. Distributions are implemented here
// rather than taken from <random> so a seed maps to the same stream on every
// standard library.
using Engine = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return MixSeed(seed ^ MixSeed(stream));
}

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline double UniformRange(Engine& engine, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(engine);
}

// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline std::uint64_t UniformIndex(Engine& engine, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> RandomPermutation(std::size_t n,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Engine engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = UniformIndex(engine, i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

// Box-Muller standard normal sampler. Each pair of uniforms yields two
// normals; the second is cached for the next call.
class NormalSampler {
 public:
  double operator()(Engine& engine);

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace splitpub
