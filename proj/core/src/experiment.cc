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

#include "splitpub/experiment.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "splitpub/errors.h"
#include "splitpub/rng.h"

namespace splitpub {
namespace {

std::chrono::microseconds Millis(double ms, const std::string& key) {
  if (!(ms >= 0.0) || !std::isfinite(ms)) {
    throw ConfigError(key + " must be a non-negative number of milliseconds");
  }
  return std::chrono::microseconds(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
}

std::vector<Mode> ParseModeList(const std::string& text) {
  std::vector<Mode> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(ParseMode(item));
  }
  if (out.empty()) throw ConfigError("compare_modes lists no modes");
  return out;
}

std::string EnsureOutDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir);
  }
  return dir;
}

std::string Join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::vector<std::string> SpecKeys() {
  return {"seed", "out_dir",
          // data
          "csv_path", "label_column", "task", "n", "d", "n_informative",
          "class_sep", "flip_fraction", "target_noise", "active_features",
          "train_fraction", "standardize",
          // training
          "mode", "batch_size", "workers_active", "workers_passive",
          "learning_rate", "epochs", "delta_t0", "deadline_ms", "p", "q", "mu",
          "dp_scale", "dp_queries", "loss_tolerance", "skew_active_ms",
          "skew_passive_ms", "max_retries", "max_inflight", "max_staleness",
          "bottom_hidden", "embed_dim", "top_hidden", "target_metric",
          "compare_modes",
          // profiling
          "calibration_batches", "calibration_repetitions", "cores_active",
          "cores_passive", "bandwidth", "reference_batch", "mem_active_cap",
          "mem_passive_cap",
          // planning
          "wa", "wp", "batches", "scale_messages"};
}

ExperimentSpec SpecFromKv(const KvFile& kv) {
  const std::vector<std::string> known = SpecKeys();
  const std::set<std::string> known_set(known.begin(), known.end());
  for (const std::string& k : kv.keys()) {
    if (!known_set.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  ExperimentSpec s;
  if (auto v = kv.GetInt("seed")) s.seed = *v;
  if (auto v = kv.GetString("out_dir")) s.out_dir = *v;

  DataSource& d = s.data;
  if (auto v = kv.GetString("csv_path")) d.csv_path = *v;
  if (auto v = kv.GetString("label_column")) d.label_column = *v;
  if (auto v = kv.GetString("task")) d.synthetic.task = ParseTask(*v);
  if (auto v = kv.GetInt("n")) d.synthetic.n = *v;
  if (auto v = kv.GetInt("d")) d.synthetic.d = *v;
  if (auto v = kv.GetInt("n_informative")) {
    d.synthetic.n_informative = *v;
  } else {
    d.synthetic.n_informative = std::max<std::size_t>(1, d.synthetic.d / 5);
  }
  if (auto v = kv.GetDouble("class_sep")) d.synthetic.class_sep = *v;
  if (auto v = kv.GetDouble("flip_fraction")) d.synthetic.flip_fraction = *v;
  if (auto v = kv.GetDouble("target_noise")) d.synthetic.target_noise = *v;
  if (auto v = kv.GetInt("active_features")) d.active_features = *v;
  if (auto v = kv.GetDouble("train_fraction")) d.train_fraction = *v;
  if (auto v = kv.GetBool("standardize")) d.standardize = *v;

  TrainConfig& t = s.train;
  if (auto v = kv.GetString("mode")) t.mode = ParseMode(*v);
  if (auto v = kv.GetInt("batch_size")) t.batch_size = *v;
  if (auto v = kv.GetInt("workers_active")) t.workers_active = *v;
  if (auto v = kv.GetInt("workers_passive")) t.workers_passive = *v;
  if (auto v = kv.GetDouble("learning_rate")) t.learning_rate = *v;
  if (auto v = kv.GetInt("epochs")) t.epochs = *v;
  if (auto v = kv.GetInt("delta_t0")) t.delta_t0 = *v;
  if (auto v = kv.GetDouble("deadline_ms")) {
    t.deadline = std::chrono::duration_cast<std::chrono::milliseconds>(
        Millis(*v, "deadline_ms"));
  }
  if (auto v = kv.GetInt("p")) t.embedding_capacity = *v;
  if (auto v = kv.GetInt("q")) t.gradient_capacity = *v;
  if (auto v = kv.GetDouble("mu")) t.mu = *v;
  if (auto v = kv.GetDouble("dp_scale")) t.dp_scale = *v;
  if (auto v = kv.GetInt("dp_queries")) t.dp_queries = *v;
  if (auto v = kv.GetDouble("loss_tolerance")) t.loss_tolerance = *v;
  if (auto v = kv.GetDouble("skew_active_ms")) t.skew_active = Millis(*v, "skew_active_ms");
  if (auto v = kv.GetDouble("skew_passive_ms")) t.skew_passive = Millis(*v, "skew_passive_ms");
  if (auto v = kv.GetInt("max_retries")) t.max_retries = *v;
  if (auto v = kv.GetInt("max_inflight")) t.max_inflight = *v;
  if (auto v = kv.GetInt("max_staleness")) t.max_staleness = *v;
  if (auto v = kv.GetSizeList("bottom_hidden")) t.arch.bottom_hidden = *v;
  if (auto v = kv.GetInt("embed_dim")) t.arch.embed_dim = *v;
  if (auto v = kv.GetSizeList("top_hidden")) t.arch.top_hidden = *v;
  if (auto v = kv.GetDouble("target_metric")) t.target_metric = *v;
  if (auto v = kv.GetString("compare_modes")) s.compare_modes = ParseModeList(*v);

  ProfileOptions& p = s.profile;
  if (auto v = kv.GetSizeList("calibration_batches")) p.calibration.batch_sizes = *v;
  if (auto v = kv.GetInt("calibration_repetitions")) p.calibration.repetitions = *v;
  if (auto v = kv.GetDouble("cores_active")) p.cores_active = *v;
  if (auto v = kv.GetDouble("cores_passive")) p.cores_passive = *v;
  if (auto v = kv.GetDouble("bandwidth")) p.bandwidth = *v;
  if (auto v = kv.GetInt("reference_batch")) p.reference_batch = *v;
  if (auto v = kv.GetDouble("mem_active_cap")) p.mem_active_cap = *v;
  if (auto v = kv.GetDouble("mem_passive_cap")) p.mem_passive_cap = *v;

  SearchSpace& sp = s.space;
  if (auto v = kv.GetString("wa")) std::tie(sp.wa_min, sp.wa_max) = ParseSizeRange(*v, "wa");
  if (auto v = kv.GetString("wp")) std::tie(sp.wp_min, sp.wp_max) = ParseSizeRange(*v, "wp");
  if (auto v = kv.GetSizeList("batches")) sp.batch_sizes = *v;
  if (auto v = kv.GetBool("scale_messages")) sp.scale_messages = *v;

  t.seed = s.seed;
  t.Validate();
  return s;
}

ExperimentSpec LoadSpec(const std::string& path) {
  return SpecFromKv(KvFile::Read(path));
}

PreparedData PrepareData(const DataSource& source, std::uint64_t seed) {
  LabeledData all;
  if (source.csv_path.empty()) {
    SyntheticOptions opts = source.synthetic;
    opts.seed = DeriveSeed(seed, 11);
    all = GenerateSynthetic(opts);
  } else {
    all = LoadCsv(source.csv_path, source.label_column, source.synthetic.task);
  }
  if (all.d() < 2) throw ConfigError("vertical split needs at least 2 features");
  if (!(source.train_fraction > 0.0 && source.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  }
  const RowSplit rows = SplitRows(all, source.train_fraction, DeriveSeed(seed, 12));
  const std::size_t d_a =
      source.active_features ? source.active_features : all.d() / 2;
  const ColumnSplit cols = MakeColumnSplit(all.d(), d_a, DeriveSeed(seed, 13));
  PreparedData out{ApplyColumnSplit(rows.train, cols),
                   ApplyColumnSplit(rows.test, cols)};
  if (source.standardize) StandardizeParties(out.train, out.test);
  return out;
}

ProfileResult RunProfile(const ExperimentSpec& spec) {
  const std::string dir = EnsureOutDir(spec.out_dir);
  const PreparedData data = PrepareData(spec.data, spec.seed);
  const SplitModels models =
      CreateSplitModels(spec.train.arch, data.train.active_dim(),
                        data.train.passive_dim(), data.train.task, spec.seed);
  ProfileOptions options = spec.profile;
  options.calibration.seed = DeriveSeed(spec.seed, 21);
  ProfileResult result = ProfileModels(models, options);
  ToKv(result.constants).Write(Join(dir, "profile.txt"));

  std::ofstream samples(Join(dir, "calibration.csv"));
  if (!samples) throw ConfigError("cannot write calibration.csv in " + dir);
  samples << "batch_size,role,elapsed_seconds,repetitions\n";
  for (const CalibrationSample& s : result.samples) {
    samples << s.batch_size << ',' << ProfileRoleName(s.role) << ','
            << FormatReal(s.elapsed) << ',' << s.repetitions << '\n';
  }
  return result;
}

PlanState RunPlan(const ExperimentSpec& spec, const std::string& profile_path) {
  const DelayModelConstants c = DelayModelFromKv(KvFile::Read(profile_path));
  const PlanState plan = DpSearch(c, spec.space);
  const std::string dir = EnsureOutDir(spec.out_dir);
  ToKv(plan, MemoryBound(c)).Write(Join(dir, "plan.txt"));
  return plan;
}

TrainResult RunTrain(const ExperimentSpec& spec) {
  const std::string dir = EnsureOutDir(spec.out_dir);
  const PreparedData data = PrepareData(spec.data, spec.seed);
  TrainConfig config = spec.train;
  config.seed = spec.seed;
  TrainResult result = RunTraining(data.train, data.test, config);
  WriteMetricsJsonl(Join(dir, "metrics.jsonl"), result.metrics);
  WriteModels(Join(dir, "model.txt"), result.models);
  return result;
}

std::vector<CompareRow> RunCompare(const ExperimentSpec& spec) {
  const std::string dir = EnsureOutDir(spec.out_dir);
  const PreparedData data = PrepareData(spec.data, spec.seed);
  std::vector<CompareRow> rows;
  for (Mode mode : spec.compare_modes) {
    CompareRow row;
    row.mode = mode;
    TrainConfig config = spec.train;
    config.seed = spec.seed;
    config.mode = mode;
    config.max_inflight = 0;
    if (mode == Mode::kPureVfl || mode == Mode::kAvfl) {
      config.workers_active = config.workers_passive = 1;
    } else if (mode == Mode::kVflPs || mode == Mode::kAvflPs) {
      config.workers_passive = config.workers_active;
    }
    try {
      TrainResult r = RunTraining(data.train, data.test, config);
      row.summary = r.metrics.summary;
      row.ok = true;
    } catch (const std::exception& e) {
      row.summary.mode = ModeName(mode);
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  std::ofstream jsonl(Join(dir, "compare.jsonl"));
  if (!jsonl) throw ConfigError("cannot write compare.jsonl in " + dir);
  for (const CompareRow& r : rows) {
    jsonl << "{\"mode\":\"" << ModeName(r.mode) << "\",\"ok\":"
          << (r.ok ? "true" : "false");
    if (r.ok) {
      jsonl << ",\"summary\":" << SummaryJson(r.summary);
    } else {
      std::string escaped;
      for (char c : r.error) {
        if (c == '"' || c == '\\') escaped.push_back('\\');
        escaped.push_back(c == '\n' ? ' ' : c);
      }
      jsonl << ",\"error\":\"" << escaped << "\"";
    }
    jsonl << "}\n";
  }
  std::ofstream table(Join(dir, "compare.txt"));
  table << FormatCompareTable(rows);
  return rows;
}

std::string FormatCompareTable(const std::vector<CompareRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-6s %10s %8s %12s %14s %10s\n",
                "mode", "status", "wall_s", "busy", "wait_s/epoch", "bytes",
                "metric");
  out += line;
  for (const CompareRow& r : rows) {
    if (!r.ok) {
      std::snprintf(line, sizeof line, "%-10s %-6s %s\n", ModeName(r.mode).c_str(),
                    "FAILED", r.error.c_str());
    } else {
      const RunSummary& s = r.summary;
      std::snprintf(line, sizeof line, "%-10s %-6s %10.3f %8.3f %12.4f %14llu %10.4f\n",
                    ModeName(r.mode).c_str(), "ok", s.total_wall_seconds,
                    s.mean_busy_fraction, s.mean_wait_seconds_per_epoch,
                    static_cast<unsigned long long>(s.total_bytes),
                    s.final_test_metric);
    }
    out += line;
  }
  return out;
}

void WriteModels(const std::string& path, const SplitModels& models) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  auto dump = [&](const char* name, const MlpModel& m) {
    out << "model " << name << " layers " << m.depth() << '\n';
    for (std::size_t k = 0; k < m.depth(); ++k) {
      const DenseLayer& l = m.layer(k);
      out << "layer " << k << ' ' << l.input_dim() << ' ' << l.output_dim() << ' '
          << ActivationName(l.activation) << '\n';
      for (std::size_t r = 0; r < l.weight.rows(); ++r) {
        for (std::size_t c = 0; c < l.weight.cols(); ++c) {
          out << (c ? " " : "") << FormatReal(l.weight(r, c));
        }
        out << '\n';
      }
      for (std::size_t c = 0; c < l.bias.cols(); ++c) {
        out << (c ? " " : "") << FormatReal(l.bias(0, c));
      }
      out << '\n';
    }
  };
  dump("bottom_active", models.bottom_active);
  dump("top", models.top);
  dump("bottom_passive", models.bottom_passive);
  if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace splitpub
