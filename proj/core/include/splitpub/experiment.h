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
#include <optional>
#include <string>
#include <vector>

#include "splitpub/datasets.h"
#include "splitpub/kv_file.h"
#include "splitpub/party_runtime.h"
#include "splitpub/planner.h"
#include "splitpub/profiler.h"

namespace splitpub {

struct DataSource {
  // Empty: synthetic data from `synthetic`.
  std::string csv_path;
  std::string label_column = "label";
  SyntheticOptions synthetic;
  // Active party's column count; 0 means half the features.
  std::size_t active_features = 0;
  double train_fraction = 0.7;
  bool standardize = true;
};

struct ExperimentSpec {
  DataSource data;
  TrainConfig train;
  std::vector<Mode> compare_modes = AllModes();
  ProfileOptions profile;
  SearchSpace space;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

// Reads a key = value config; unknown keys are a ConfigError. The seed fans
// out to data, split, initialization and noise streams.
ExperimentSpec SpecFromKv(const KvFile& kv);
ExperimentSpec LoadSpec(const std::string& path);
// Keys accepted by SpecFromKv.
std::vector<std::string> SpecKeys();

struct PreparedData {
  VerticalDataset train;
  VerticalDataset test;
};

// Load or generate, split rows 70:30, split columns, standardize.
PreparedData PrepareData(const DataSource& source, std::uint64_t seed);

// Each command writes its outputs under spec.out_dir.
// profile.txt: fitted delay-model constants.
ProfileResult RunProfile(const ExperimentSpec& spec);
// plan.txt: chosen (w_a, w_p, B) and its predicted cost.
PlanState RunPlan(const ExperimentSpec& spec, const std::string& profile_path);
// metrics.jsonl and model.txt.
TrainResult RunTrain(const ExperimentSpec& spec);

struct CompareRow {
  Mode mode = Mode::kPubSubVfl;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

// compare.jsonl and compare.txt, one row per mode. Single-pair modes run
// with one worker per party; the rest use the configured worker counts. A failing
// mode is reported in its row and the others still run.
std::vector<CompareRow> RunCompare(const ExperimentSpec& spec);

// Human-readable table of compare rows.
std::string FormatCompareTable(const std::vector<CompareRow>& rows);

// Writes every layer's weights and biases as text.
void WriteModels(const std::string& path, const SplitModels& models);

}  // namespace splitpub
