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
#include <span>
#include <string>
#include <vector>

#include "splitpub/kv_file.h"
#include "splitpub/party_runtime.h"

namespace splitpub {

enum class ProfileRole {
  kActiveBottomFwd,
  kActiveBottomBwd,
  kTopFwd,
  kTopBwd,
  kPassiveFwd,
  kPassiveBwd,
};

inline constexpr std::size_t kProfileRoleCount = 6;

const char* ProfileRoleName(ProfileRole role);
std::vector<ProfileRole> AllProfileRoles();

struct CalibrationSample {
  std::size_t batch_size = 0;
  ProfileRole role = ProfileRole::kActiveBottomFwd;
  double elapsed = 0.0;  // seconds, median over repetitions
  std::size_t repetitions = 0;
};

struct CalibrationOptions {
  std::vector<std::size_t> batch_sizes = {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  std::size_t repetitions = 5;
  // Each repetition loops a pass until at least this long has elapsed and
  // reports the per-pass mean, so tiny batches still time reliably.
  double min_measure_seconds = 2e-4;
  std::uint64_t seed = 0;
};

// Times forward and backward of every model on random inputs of matching
// width, one (B, role) sample per pair, single-threaded.
std::vector<CalibrationSample> RunCalibration(const SplitModels& models,
                                              const CalibrationOptions& options);

struct PowerLawFit {
  double coef = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;
};

// OLS of log T on log B. Needs at least 3 distinct B and all T > 0.
PowerLawFit FitPowerLaw(std::span<const double> batch_sizes,
                        std::span<const double> times);
// Fits the samples of `role` only.
PowerLawFit FitPowerLaw(std::span<const CalibrationSample> samples,
                        ProfileRole role);

inline constexpr double kPoorFitRSquared = 0.9;

struct DelayModelConstants {
  // Forward: T = lambda * B^gamma * w / C.
  double lambda_a = 0.0, gamma_a = 0.0;
  double lambda_p = 0.0, gamma_p = 0.0;
  // Backward: T = phi * B^beta * w / C.
  double phi_a = 0.0, beta_a = 0.0;
  double phi_p = 0.0, beta_p = 0.0;
  // Top model forward and backward (active party).
  double lambda_a_top = 0.0, gamma_a_top = 0.0;
  double phi_a_top = 0.0, beta_a_top = 0.0;
  double cores_active = 1.0;   // C_a
  double cores_passive = 1.0;  // C_p
  double embedding_bytes = 0.0;  // E
  double gradient_bytes = 0.0;   // G
  double bandwidth = 1.0;        // B_b, bytes per second
  // Batch size E and G were measured at; used when messages scale with B.
  double reference_batch = 1.0;
  // Memory: M(B) = M0 + rho * B^chi, capped at Mbar.
  double mem_active_base = 0.0;
  double mem_passive_base = 0.0;
  double rho_active = 1.0;
  double rho_passive = 1.0;
  double chi = 1.0;
  double mem_active_cap = 1.0;
  double mem_passive_cap = 1.0;

  // Throws ConfigError unless C >= 1, B_b > 0, rho > 0, chi > 0 and every
  // value is finite.
  void Validate() const;
};

// Key names used in the profile file, in file order.
std::vector<std::string> DelayModelKeys();
KvFile ToKv(const DelayModelConstants& c);
DelayModelConstants DelayModelFromKv(const KvFile& kv);

struct PredictedTimes {
  double forward_active = 0.0;
  double backward_active = 0.0;
  double top_active = 0.0;
  double forward_passive = 0.0;
  double backward_passive = 0.0;
  double embedding_transfer = 0.0;
  double gradient_transfer = 0.0;
};

// The B-dependent parts of PredictTimes: coef * B^exp per term and the
// transfer times. Independent of worker counts, so a search can cache them.
struct BatchFactors {
  double forward_active = 0.0;
  double backward_active = 0.0;
  double top_forward = 0.0;
  double top_backward = 0.0;
  double forward_passive = 0.0;
  double backward_passive = 0.0;
  double embedding_transfer = 0.0;
  double gradient_transfer = 0.0;
};

BatchFactors FactorsAt(const DelayModelConstants& c, std::size_t batch,
                       bool scale_messages = false);
// Applies the equal-assignment w / C scaling to cached factors.
PredictedTimes ScaleFactors(const DelayModelConstants& c, const BatchFactors& f,
                            std::size_t w_a, std::size_t w_p);

// When `scale_messages` is set, E and G grow linearly with B from their
// reference-batch values (the 16-byte header stays fixed).
PredictedTimes PredictTimes(const DelayModelConstants& c, std::size_t batch,
                            std::size_t w_a, std::size_t w_p,
                            bool scale_messages = false);

// min over parties of ((Mbar - M0) / rho)^(1 / chi). Throws InfeasiblePlan
// when a party has Mbar <= M0.
double MemoryBound(const DelayModelConstants& c);

struct ProfileOptions {
  CalibrationOptions calibration;
  double cores_active = 32.0;
  double cores_passive = 32.0;
  double bandwidth = 1.25e8;
  std::size_t reference_batch = 256;
  double mem_active_cap = 1073741824.0;
  double mem_passive_cap = 1073741824.0;
};

struct ProfileResult {
  DelayModelConstants constants;
  std::vector<CalibrationSample> samples;
  std::vector<PowerLawFit> fits;  // indexed by ProfileRole
  std::vector<std::string> warnings;
};

// Calibration + fits + analytic memory model for the given models.
ProfileResult ProfileModels(const SplitModels& models,
                            const ProfileOptions& options);

}  // namespace splitpub
