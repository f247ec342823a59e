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

#include "splitpub/profiler.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "splitpub/broker.h"
#include "splitpub/errors.h"
#include "splitpub/rng.h"

namespace splitpub {
namespace {

Matrix RandomMatrix(std::size_t rows, std::size_t cols, Engine& engine) {
  NormalSampler normal;
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(engine);
  return m;
}

double TimePass(const std::function<void()>& pass, double min_seconds) {
  std::size_t iterations = 0;
  const Clock::time_point start = Clock::now();
  double elapsed = 0.0;
  do {
    pass();
    ++iterations;
    elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  } while (elapsed < min_seconds);
  return elapsed / static_cast<double>(iterations);
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Bytes of activations held per sample during one step: the input plus each
// layer's pre- and post-activation, doubled for the backward temporaries.
double ActivationBytesPerSample(const MlpModel& m) {
  double values = static_cast<double>(m.input_dim());
  for (const DenseLayer& l : m.layers()) values += 2.0 * l.output_dim();
  return 2.0 * 8.0 * values;
}

// Parameters, their gradients and one snapshot.
double ParameterBytes(const MlpModel& m) {
  return 3.0 * 8.0 * static_cast<double>(m.parameter_count());
}

struct KeyRef {
  const char* key;
  double DelayModelConstants::*field;
};

const std::vector<KeyRef>& KeyTable() {
  static const std::vector<KeyRef> table = {
      {"lambda_a", &DelayModelConstants::lambda_a},
      {"gamma_a", &DelayModelConstants::gamma_a},
      {"lambda_p", &DelayModelConstants::lambda_p},
      {"gamma_p", &DelayModelConstants::gamma_p},
      {"phi_a", &DelayModelConstants::phi_a},
      {"beta_a", &DelayModelConstants::beta_a},
      {"phi_p", &DelayModelConstants::phi_p},
      {"beta_p", &DelayModelConstants::beta_p},
      {"lambda_a_top", &DelayModelConstants::lambda_a_top},
      {"gamma_a_top", &DelayModelConstants::gamma_a_top},
      {"phi_a_top", &DelayModelConstants::phi_a_top},
      {"beta_a_top", &DelayModelConstants::beta_a_top},
      {"cores_active", &DelayModelConstants::cores_active},
      {"cores_passive", &DelayModelConstants::cores_passive},
      {"embedding_bytes", &DelayModelConstants::embedding_bytes},
      {"gradient_bytes", &DelayModelConstants::gradient_bytes},
      {"bandwidth", &DelayModelConstants::bandwidth},
      {"reference_batch", &DelayModelConstants::reference_batch},
      {"mem_active_base", &DelayModelConstants::mem_active_base},
      {"mem_passive_base", &DelayModelConstants::mem_passive_base},
      {"rho_active", &DelayModelConstants::rho_active},
      {"rho_passive", &DelayModelConstants::rho_passive},
      {"chi", &DelayModelConstants::chi},
      {"mem_active_cap", &DelayModelConstants::mem_active_cap},
      {"mem_passive_cap", &DelayModelConstants::mem_passive_cap},
  };
  return table;
}

double BranchBound(double cap, double base, double rho, double chi) {
  if (!(cap > base)) {
    throw InfeasiblePlan("memory cap " + FormatReal(cap) +
                         " does not exceed the base footprint " +
                         FormatReal(base));
  }
  const double x = (cap - base) / rho;
  if (chi == 1.0) return x;
  if (chi == 2.0) return std::sqrt(x);
  return std::pow(x, 1.0 / chi);
}

}  // namespace

const char* ProfileRoleName(ProfileRole role) {
  switch (role) {
    case ProfileRole::kActiveBottomFwd: return "active_bottom_fwd";
    case ProfileRole::kActiveBottomBwd: return "active_bottom_bwd";
    case ProfileRole::kTopFwd: return "top_fwd";
    case ProfileRole::kTopBwd: return "top_bwd";
    case ProfileRole::kPassiveFwd: return "passive_fwd";
    case ProfileRole::kPassiveBwd: return "passive_bwd";
  }
  return "unknown";
}

std::vector<ProfileRole> AllProfileRoles() {
  return {ProfileRole::kActiveBottomFwd, ProfileRole::kActiveBottomBwd,
          ProfileRole::kTopFwd,          ProfileRole::kTopBwd,
          ProfileRole::kPassiveFwd,      ProfileRole::kPassiveBwd};
}

std::vector<CalibrationSample> RunCalibration(const SplitModels& models,
                                              const CalibrationOptions& options) {
  if (options.batch_sizes.empty()) {
    throw ConfigError("calibration needs at least one batch size");
  }
  if (options.repetitions == 0) {
    throw ConfigError("calibration needs at least one repetition");
  }
  struct Fixture {
    Matrix xa, xp, h;
    ForwardResult fa, fp, g;
    Matrix da, dp, dg;
  };
  Engine engine(options.seed);
  std::vector<Fixture> fixtures;
  fixtures.reserve(options.batch_sizes.size());
  for (std::size_t b : options.batch_sizes) {
    if (b == 0) throw ConfigError("calibration batch sizes must be at least 1");
    Fixture f;
    f.xa = RandomMatrix(b, models.bottom_active.input_dim(), engine);
    f.xp = RandomMatrix(b, models.bottom_passive.input_dim(), engine);
    f.h = RandomMatrix(b, models.top.input_dim(), engine);
    f.fa = Forward(models.bottom_active, f.xa);
    f.fp = Forward(models.bottom_passive, f.xp);
    f.g = Forward(models.top, f.h);
    f.da = RandomMatrix(b, f.fa.output.cols(), engine);
    f.dp = RandomMatrix(b, f.fp.output.cols(), engine);
    f.dg = RandomMatrix(b, f.g.output.cols(), engine);
    fixtures.push_back(std::move(f));
  }

  auto pass_for = [&](const Fixture& f, ProfileRole role) -> std::function<void()> {
    switch (role) {
      case ProfileRole::kActiveBottomFwd:
        return [&] { (void)Forward(models.bottom_active, f.xa); };
      case ProfileRole::kActiveBottomBwd:
        return [&] { (void)Backward(models.bottom_active, f.fa.tape, f.da); };
      case ProfileRole::kTopFwd:
        return [&] { (void)Forward(models.top, f.h); };
      case ProfileRole::kTopBwd:
        return [&] { (void)Backward(models.top, f.g.tape, f.dg); };
      case ProfileRole::kPassiveFwd:
        return [&] { (void)Forward(models.bottom_passive, f.xp); };
      case ProfileRole::kPassiveBwd:
        return [&] { (void)Backward(models.bottom_passive, f.fp.tape, f.dp); };
    }
    return [] {};
  };

  // Repetitions sweep every cell in turn so slow drift in machine speed
  // lands on all batch sizes alike instead of tilting the fitted exponent.
  const std::vector<ProfileRole> roles = AllProfileRoles();
  std::vector<std::vector<double>> times(fixtures.size() * roles.size());
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
      for (std::size_t k = 0; k < roles.size(); ++k) {
        times[i * roles.size() + k].push_back(
            TimePass(pass_for(fixtures[i], roles[k]), options.min_measure_seconds));
      }
    }
  }
  std::vector<CalibrationSample> out;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    for (std::size_t k = 0; k < roles.size(); ++k) {
      out.push_back({options.batch_sizes[i], roles[k],
                     std::max(Median(times[i * roles.size() + k]), 1e-12),
                     options.repetitions});
    }
  }
  return out;
}

PowerLawFit FitPowerLaw(std::span<const double> batch_sizes,
                        std::span<const double> times) {
  if (batch_sizes.size() != times.size()) {
    throw ConfigError("power-law fit needs one time per batch size");
  }
  std::set<double> distinct;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(batch_sizes[i] > 0.0) || !(times[i] > 0.0)) {
      throw ConfigError("power-law fit needs positive batch sizes and times");
    }
    distinct.insert(batch_sizes[i]);
  }
  if (distinct.size() < 3) {
    throw ConfigError("power-law fit needs at least 3 distinct batch sizes");
  }
  const double n = static_cast<double>(times.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    mx += std::log(batch_sizes[i]);
    my += std::log(times[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dx = std::log(batch_sizes[i]) - mx;
    const double dy = std::log(times[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.coef = std::exp(my - fit.exponent * mx);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double r = std::log(times[i]) -
                     (my + fit.exponent * (std::log(batch_sizes[i]) - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

PowerLawFit FitPowerLaw(std::span<const CalibrationSample> samples,
                        ProfileRole role) {
  std::vector<double> b, t;
  for (const CalibrationSample& s : samples) {
    if (s.role != role) continue;
    b.push_back(static_cast<double>(s.batch_size));
    t.push_back(s.elapsed);
  }
  return FitPowerLaw(b, t);
}

void DelayModelConstants::Validate() const {
  for (const KeyRef& k : KeyTable()) {
    if (!std::isfinite(this->*k.field)) {
      throw ConfigError(std::string("delay constant ") + k.key + " is not finite");
    }
  }
  if (cores_active < 1.0 || cores_passive < 1.0) {
    throw ConfigError("core counts must be at least 1");
  }
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(rho_active > 0.0) || !(rho_passive > 0.0)) {
    throw ConfigError("memory slopes rho must be positive");
  }
  if (!(chi > 0.0)) throw ConfigError("memory exponent chi must be positive");
  if (!(reference_batch > 0.0)) {
    throw ConfigError("reference batch must be positive");
  }
  if (embedding_bytes < 0.0 || gradient_bytes < 0.0) {
    throw ConfigError("message sizes must be non-negative");
  }
}

std::vector<std::string> DelayModelKeys() {
  std::vector<std::string> keys;
  for (const KeyRef& k : KeyTable()) keys.emplace_back(k.key);
  return keys;
}

KvFile ToKv(const DelayModelConstants& c) {
  KvFile kv;
  for (const KeyRef& k : KeyTable()) kv.SetDouble(k.key, c.*k.field);
  return kv;
}

DelayModelConstants DelayModelFromKv(const KvFile& kv) {
  DelayModelConstants c;
  for (const KeyRef& k : KeyTable()) c.*k.field = kv.RequireDouble(k.key);
  c.Validate();
  return c;
}

BatchFactors FactorsAt(const DelayModelConstants& c, std::size_t batch,
                       bool scale_messages) {
  if (batch == 0) throw ConfigError("batch size must be at least 1");
  const double b = static_cast<double>(batch);
  auto message = [&](double reference_bytes) {
    if (!scale_messages) return reference_bytes;
    const double header = std::min(reference_bytes, 16.0);
    return header + (reference_bytes - header) * b / c.reference_batch;
  };
  BatchFactors f;
  f.forward_active = c.lambda_a * std::pow(b, c.gamma_a);
  f.backward_active = c.phi_a * std::pow(b, c.beta_a);
  f.top_forward = c.lambda_a_top * std::pow(b, c.gamma_a_top);
  f.top_backward = c.phi_a_top * std::pow(b, c.beta_a_top);
  f.forward_passive = c.lambda_p * std::pow(b, c.gamma_p);
  f.backward_passive = c.phi_p * std::pow(b, c.beta_p);
  f.embedding_transfer = message(c.embedding_bytes) / c.bandwidth;
  f.gradient_transfer = message(c.gradient_bytes) / c.bandwidth;
  return f;
}

PredictedTimes ScaleFactors(const DelayModelConstants& c, const BatchFactors& f,
                            std::size_t w_a, std::size_t w_p) {
  if (w_a == 0 || w_p == 0) throw ConfigError("worker counts must be at least 1");
  const double wa = static_cast<double>(w_a);
  const double wp = static_cast<double>(w_p);
  PredictedTimes t;
  t.forward_active = f.forward_active * wa / c.cores_active;
  t.backward_active = f.backward_active * wa / c.cores_active;
  t.top_active = f.top_forward * wa / c.cores_active +
                 f.top_backward * wa / c.cores_active;
  t.forward_passive = f.forward_passive * wp / c.cores_passive;
  t.backward_passive = f.backward_passive * wp / c.cores_passive;
  t.embedding_transfer = f.embedding_transfer;
  t.gradient_transfer = f.gradient_transfer;
  return t;
}

PredictedTimes PredictTimes(const DelayModelConstants& c, std::size_t batch,
                            std::size_t w_a, std::size_t w_p,
                            bool scale_messages) {
  return ScaleFactors(c, FactorsAt(c, batch, scale_messages), w_a, w_p);
}

double MemoryBound(const DelayModelConstants& c) {
  return std::min(
      BranchBound(c.mem_active_cap, c.mem_active_base, c.rho_active, c.chi),
      BranchBound(c.mem_passive_cap, c.mem_passive_base, c.rho_passive, c.chi));
}

ProfileResult ProfileModels(const SplitModels& models,
                            const ProfileOptions& options) {
  ProfileResult result;
  result.samples = RunCalibration(models, options.calibration);
  for (ProfileRole role : AllProfileRoles()) {
    PowerLawFit fit = FitPowerLaw(result.samples, role);
    if (fit.r_squared < kPoorFitRSquared) {
      result.warnings.push_back(std::string("poor power-law fit for ") +
                                ProfileRoleName(role) + " (r^2 = " +
                                FormatReal(fit.r_squared) + ")");
    }
    result.fits.push_back(fit);
  }
  DelayModelConstants& c = result.constants;
  auto fit = [&](ProfileRole r) { return result.fits[static_cast<std::size_t>(r)]; };
  c.lambda_a = fit(ProfileRole::kActiveBottomFwd).coef;
  c.gamma_a = fit(ProfileRole::kActiveBottomFwd).exponent;
  c.phi_a = fit(ProfileRole::kActiveBottomBwd).coef;
  c.beta_a = fit(ProfileRole::kActiveBottomBwd).exponent;
  c.lambda_a_top = fit(ProfileRole::kTopFwd).coef;
  c.gamma_a_top = fit(ProfileRole::kTopFwd).exponent;
  c.phi_a_top = fit(ProfileRole::kTopBwd).coef;
  c.beta_a_top = fit(ProfileRole::kTopBwd).exponent;
  c.lambda_p = fit(ProfileRole::kPassiveFwd).coef;
  c.gamma_p = fit(ProfileRole::kPassiveFwd).exponent;
  c.phi_p = fit(ProfileRole::kPassiveBwd).coef;
  c.beta_p = fit(ProfileRole::kPassiveBwd).exponent;
  c.cores_active = options.cores_active;
  c.cores_passive = options.cores_passive;
  c.bandwidth = options.bandwidth;
  c.reference_batch = static_cast<double>(options.reference_batch);
  const Matrix embedding(options.reference_batch, models.bottom_passive.output_dim());
  c.embedding_bytes = static_cast<double>(PayloadWireSize(embedding));
  c.gradient_bytes = static_cast<double>(PayloadWireSize(embedding));
  c.mem_active_base = ParameterBytes(models.bottom_active) + ParameterBytes(models.top);
  c.mem_passive_base = ParameterBytes(models.bottom_passive);
  c.rho_active = ActivationBytesPerSample(models.bottom_active) +
                 ActivationBytesPerSample(models.top);
  c.rho_passive = ActivationBytesPerSample(models.bottom_passive);
  c.chi = 1.0;
  c.mem_active_cap = options.mem_active_cap;
  c.mem_passive_cap = options.mem_passive_cap;
  c.Validate();
  return result;
}

}  // namespace splitpub
