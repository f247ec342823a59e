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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "splitpub/errors.h"
#include "splitpub/experiment.h"
#include "splitpub/kv_file.h"
#include "splitpub/metrics.h"
#include "splitpub/party_runtime.h"
#include "splitpub/planner.h"
#include "splitpub/profiler.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;
constexpr int kExitInfeasible = 4;

struct Overrides {
  std::string config;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> wa;
  std::optional<std::string> wp;
  std::optional<std::string> batches;
  std::optional<std::string> mu;
  std::optional<double> tddl_ms;
  std::optional<std::size_t> p;
  std::optional<std::size_t> q;
  std::optional<std::size_t> delta_t0;
  std::optional<double> skew_passive_ms;
  std::optional<double> skew_active_ms;
  std::optional<std::size_t> epochs;
};

void AddCommonFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value experiment file");
  cmd->add_option("--mode", o.mode,
                  "PubSubVFL, PureVFL, VFL_PS, AVFL or AVFL_PS");
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--wa", o.wa, "active workers (plan: range such as 2..50)");
  cmd->add_option("--wp", o.wp, "passive workers (plan: range such as 2..50)");
  cmd->add_option("--batches", o.batches,
                  "batch size (plan: list such as 16,32,64)");
  cmd->add_option("--mu", o.mu, "GDP budget mu; inf disables noise");
  cmd->add_option("--tddl-ms", o.tddl_ms, "subscribe deadline in ms");
  cmd->add_option("--p", o.p, "embedding channel capacity");
  cmd->add_option("--q", o.q, "gradient channel capacity");
  cmd->add_option("--delta-t0", o.delta_t0, "synchronization interval cap");
  cmd->add_option("--skew-passive-ms", o.skew_passive_ms,
                  "extra passive compute per batch in ms");
  cmd->add_option("--skew-active-ms", o.skew_active_ms,
                  "extra active compute per batch in ms");
  cmd->add_option("--epochs", o.epochs, "training epochs");
}

splitpub::ExperimentSpec BuildSpec(const Overrides& o, bool planning) {
  splitpub::KvFile kv;
  if (!o.config.empty()) kv = splitpub::KvFile::Read(o.config);
  if (o.mode) kv.Set("mode", *o.mode);
  if (o.seed) kv.SetInt("seed", *o.seed);
  if (o.out) kv.Set("out_dir", *o.out);
  if (o.wa) kv.Set(planning ? "wa" : "workers_active", *o.wa);
  if (o.wp) kv.Set(planning ? "wp" : "workers_passive", *o.wp);
  if (o.batches) kv.Set(planning ? "batches" : "batch_size", *o.batches);
  if (o.mu) kv.Set("mu", *o.mu);
  if (o.tddl_ms) kv.SetDouble("deadline_ms", *o.tddl_ms);
  if (o.p) kv.SetInt("p", *o.p);
  if (o.q) kv.SetInt("q", *o.q);
  if (o.delta_t0) kv.SetInt("delta_t0", *o.delta_t0);
  if (o.skew_passive_ms) kv.SetDouble("skew_passive_ms", *o.skew_passive_ms);
  if (o.skew_active_ms) kv.SetDouble("skew_active_ms", *o.skew_active_ms);
  if (o.epochs) kv.SetInt("epochs", *o.epochs);
  return splitpub::SpecFromKv(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splitpub: two-party split learning with publish/subscribe"};
  app.require_subcommand(1);

  Overrides o;
  std::string profile_path;
  CLI::App* profile = app.add_subcommand("profile", "calibrate delay-model constants");
  CLI::App* plan = app.add_subcommand("plan", "search (w_a, w_p, B) from a profile");
  CLI::App* train = app.add_subcommand("train", "train one mode, write metrics.jsonl");
  CLI::App* compare = app.add_subcommand("compare", "train every listed mode");
  for (CLI::App* cmd : {profile, plan, train, compare}) AddCommonFlags(cmd, o);
  plan->add_option("--profile", profile_path, "constants file from `profile`")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (profile->parsed()) {
      const auto result = splitpub::RunProfile(BuildSpec(o, false));
      for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << splitpub::ToKv(result.constants).Serialize();
    } else if (plan->parsed()) {
      const splitpub::ExperimentSpec spec = BuildSpec(o, true);
      const splitpub::PlanState state = splitpub::RunPlan(spec, profile_path);
      std::cout << "workers_active = " << state.w_a << '\n'
                << "workers_passive = " << state.w_p << '\n'
                << "batch_size = " << state.batch << '\n'
                << "predicted_iteration_seconds = "
                << splitpub::FormatReal(state.cost) << '\n';
    } else if (train->parsed()) {
      const splitpub::TrainResult result = splitpub::RunTrain(BuildSpec(o, false));
      std::cout << splitpub::SummaryJson(result.metrics.summary) << '\n';
    } else if (compare->parsed()) {
      const auto rows = splitpub::RunCompare(BuildSpec(o, false));
      std::cout << splitpub::FormatCompareTable(rows);
    }
  } catch (const splitpub::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const splitpub::TrainingAbort& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return kExitAbort;
  } catch (const splitpub::InfeasiblePlan& e) {
    std::cerr << "infeasible plan: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
