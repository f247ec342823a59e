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

#include "splitpub/privacy.h"

#include <cmath>
#include <numbers>
#include <string>

#include "splitpub/errors.h"

namespace splitpub {

double NormalSampler::operator()(Engine& engine) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - U lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - UniformUnit(engine);
  const double u2 = UniformUnit(engine);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void GdpConfig::Validate() const {
  if (!(mu > 0.0)) throw ConfigError("gdp mu must be positive or infinite");
  if (minibatch_size == 0 || minibatch_size > whole_batch_size) {
    throw ConfigError("gdp requires 1 <= N_m <= N (got N_m=" +
                      std::to_string(minibatch_size) +
                      ", N=" + std::to_string(whole_batch_size) + ")");
  }
  if (num_queries == 0) throw ConfigError("gdp num_queries must be at least 1");
  if (!(scale_constant > 0.0) || !std::isfinite(scale_constant)) {
    throw ConfigError("gdp scale constant must be positive and finite");
  }
}

double CalibrateSigma(const GdpConfig& config) {
  config.Validate();
  if (!config.enabled()) return 0.0;
  return config.scale_constant * static_cast<double>(config.minibatch_size) *
         std::sqrt(static_cast<double>(config.num_queries)) /
         (config.mu * static_cast<double>(config.whole_batch_size));
}

void NoiseReport::Record(double x) {
  ++samples_drawn;
  const double delta = x - mean;
  mean += delta / static_cast<double>(samples_drawn);
  m2 += delta * (x - mean);
}

double NoiseReport::variance() const {
  return samples_drawn > 1 ? m2 / static_cast<double>(samples_drawn - 1) : 0.0;
}

double NoiseReport::stddev() const { return std::sqrt(variance()); }

namespace {

void CheckSigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise sigma must be finite and non-negative");
  }
}

}  // namespace

NoiseStream::NoiseStream(double sigma_dp, std::uint64_t seed) : engine_(seed) {
  CheckSigma(sigma_dp);
  report_.sigma_dp = sigma_dp;
}

Matrix NoiseStream::AddNoise(const Matrix& input) {
  Matrix out = input;
  if (report_.sigma_dp == 0.0) return out;
  for (double& v : out.values()) {
    const double xi = report_.sigma_dp * normal_(engine_);
    report_.Record(xi);
    v += xi;
  }
  return out;
}

Matrix AddNoise(const Matrix& input, double sigma_dp, Engine& engine) {
  CheckSigma(sigma_dp);
  Matrix out = input;
  if (sigma_dp == 0.0) return out;
  NormalSampler normal;
  for (double& v : out.values()) v += sigma_dp * normal(engine);
  return out;
}

}  // namespace splitpub
