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

#include "splitpub/datasets.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "splitpub/errors.h"
#include "splitpub/rng.h"

namespace splitpub {
namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
    --e;
  }
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(Trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(Trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool ParseDouble(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string TaskName(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

Task ParseTask(const std::string& name) {
  if (name == "classification") return Task::kClassification;
  if (name == "regression") return Task::kRegression;
  throw ConfigError("unknown task '" + name +
                    "' (expected classification or regression)");
}

LabeledData GenerateSynthetic(const SyntheticOptions& options) {
  if (options.n == 0) throw ConfigError("synthetic dataset needs n >= 1");
  if (options.d == 0) throw ConfigError("synthetic dataset needs d >= 1");
  if (options.n_informative == 0 || options.n_informative > options.d) {
    throw ConfigError("n_informative must be in [1, d]");
  }
  if (options.flip_fraction < 0.0 || options.flip_fraction > 0.5) {
    throw ConfigError("flip_fraction must be in [0, 0.5]");
  }

  Engine engine(DeriveSeed(options.seed, 0x5e7));
  NormalSampler normal;
  const std::size_t n = options.n;
  const std::size_t d = options.d;
  const std::size_t k = options.n_informative;

  LabeledData data;
  data.task = options.task;
  data.features = Matrix(n, d);
  data.labels = Matrix(n, 1);
  for (std::size_t j = 0; j < d; ++j) {
    data.feature_names.push_back("x" + std::to_string(j));
  }

  // Informative columns are scattered among the noise columns.
  std::vector<std::size_t> columns = RandomPermutation(d, engine());
  std::vector<std::size_t> informative(columns.begin(), columns.begin() + k);

  if (options.task == Task::kClassification) {
    std::vector<double> centroid(k);
    for (double& c : centroid) {
      c = (engine() & 1) ? options.class_sep : -options.class_sep;
    }
    // Exactly balanced classes, shuffled into row order.
    std::vector<std::size_t> rows = RandomPermutation(n, engine());
    for (std::size_t r = 0; r < n; ++r) {
      data.labels(rows[r], 0) = r < n / 2 ? 0.0 : 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) data.features(i, j) = normal(engine);
      const double sign = data.labels(i, 0) == 1.0 ? 1.0 : -1.0;
      for (std::size_t m = 0; m < k; ++m) {
        data.features(i, informative[m]) += sign * centroid[m];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (UniformUnit(engine) < options.flip_fraction) {
        data.labels(i, 0) = 1.0 - data.labels(i, 0);
      }
    }
  } else {
    std::vector<double> coef(k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (double& c : coef) c = UniformRange(engine, -1.0, 1.0) * scale;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) data.features(i, j) = normal(engine);
      double y = 0.0;
      for (std::size_t m = 0; m < k; ++m) {
        y += coef[m] * data.features(i, informative[m]);
      }
      data.labels(i, 0) = y + options.target_noise * normal(engine);
    }
  }
  return data;
}

LabeledData LoadCsv(const std::string& path, const std::string& label_column,
                    Task task) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("CSV file '" + path + "' has no header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const std::vector<std::string> header = SplitCommas(line);
  std::size_t label_index = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) label_index = j;
  }
  if (label_index == header.size()) {
    throw ConfigError("CSV file '" + path + "' has no label column '" +
                      label_column + "'");
  }
  if (header.size() < 2) {
    throw ConfigError("CSV file '" + path + "' has no feature columns");
  }

  LabeledData data;
  data.task = task;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_index) data.feature_names.push_back(header[j]);
  }
  std::vector<double> features;
  std::vector<double> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = SplitCommas(line);
    if (cells.size() != header.size()) {
      throw ConfigError("CSV '" + path + "' row " + std::to_string(row) +
                        ": expected " + std::to_string(header.size()) +
                        " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      if (!ParseDouble(cells[j], v)) {
        throw ConfigError("CSV '" + path + "' row " + std::to_string(row) +
                          ", column " + std::to_string(j + 1) +
                          ": cannot parse '" + cells[j] + "' as a number");
      }
      if (j == label_index) {
        labels.push_back(v);
      } else {
        features.push_back(v);
      }
    }
  }
  if (row == 0) throw ConfigError("CSV file '" + path + "' has no data rows");
  data.features = Matrix(row, header.size() - 1, std::move(features));
  data.labels = Matrix(row, 1, std::move(labels));
  return data;
}

void WriteCsv(const std::string& path, const LabeledData& data,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
  for (std::size_t j = 0; j < data.d(); ++j) {
    out << (j < data.feature_names.size() ? data.feature_names[j]
                                          : "x" + std::to_string(j))
        << ',';
  }
  out << label_column << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.d(); ++j) {
      out << FormatDouble(data.features(i, j)) << ',';
    }
    out << FormatDouble(data.labels(i, 0)) << '\n';
  }
  if (!out) throw ConfigError("failed writing CSV file '" + path + "'");
}

RowSplit SplitRows(const LabeledData& data, double train_fraction,
                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  const std::size_t n = data.n();
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw ConfigError("row split leaves an empty train or test set");
  }
  const std::vector<std::size_t> perm = RandomPermutation(n, seed);
  std::span<const std::size_t> all(perm);
  RowSplit split;
  for (LabeledData* part : {&split.train, &split.test}) {
    part->task = data.task;
    part->feature_names = data.feature_names;
  }
  split.train.features = GatherRows(data.features, all.first(n_train));
  split.train.labels = GatherRows(data.labels, all.first(n_train));
  split.test.features = GatherRows(data.features, all.subspan(n_train));
  split.test.labels = GatherRows(data.labels, all.subspan(n_train));
  return split;
}

ColumnSplit MakeColumnSplit(std::size_t d, std::size_t d_a,
                            std::uint64_t seed) {
  if (d < 2 || d_a < 1 || d_a > d - 1) {
    throw ConfigError("active feature count " + std::to_string(d_a) +
                      " must be in [1, " + std::to_string(d == 0 ? 0 : d - 1) +
                      "]");
  }
  const std::vector<std::size_t> perm = RandomPermutation(d, DeriveSeed(seed, 0xc01));
  ColumnSplit split;
  split.active.assign(perm.begin(), perm.begin() + d_a);
  split.passive.assign(perm.begin() + d_a, perm.end());
  return split;
}

VerticalDataset ApplyColumnSplit(const LabeledData& data,
                                 const ColumnSplit& split) {
  VerticalDataset v;
  v.active_features = GatherColumns(data.features, split.active);
  v.passive_features = GatherColumns(data.features, split.passive);
  v.labels = data.labels;
  v.task = data.task;
  return v;
}

VerticalDataset VerticalSplit(const LabeledData& data, std::size_t d_a,
                              std::uint64_t seed) {
  return ApplyColumnSplit(data, MakeColumnSplit(data.d(), d_a, seed));
}

Standardizer Standardizer::Fit(const Matrix& m) {
  Standardizer s;
  s.mean_.assign(m.cols(), 0.0);
  s.scale_.assign(m.cols(), 1.0);
  if (m.rows() == 0) return s;
  const double n = static_cast<double>(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) sum += m(i, j);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      sq += (m(i, j) - mean) * (m(i, j) - mean);
    }
    const double sd = std::sqrt(sq / n);
    s.mean_[j] = mean;
    // Constant columns are centered but not scaled.
    s.scale_[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void Standardizer::Apply(Matrix& m) const {
  if (m.cols() != mean_.size()) {
    throw ConfigError("Standardizer column count mismatch");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean_[j]) / scale_[j];
  }
}

void StandardizeParties(VerticalDataset& train, VerticalDataset& test) {
  const Standardizer active = Standardizer::Fit(train.active_features);
  active.Apply(train.active_features);
  active.Apply(test.active_features);
  const Standardizer passive = Standardizer::Fit(train.passive_features);
  passive.Apply(train.passive_features);
  passive.Apply(test.passive_features);
}

std::span<const std::size_t> BatchPlan::Indices(std::size_t batch_id) const {
  const BatchSpan& b = batches.at(batch_id);
  return std::span<const std::size_t>(order).subspan(b.begin, b.size());
}

BatchPlan MakeBatchPlan(std::size_t n, std::size_t batch_size,
                        std::uint64_t shuffle_seed) {
  if (batch_size < 1 || batch_size > n) {
    throw ConfigError("batch size " + std::to_string(batch_size) +
                      " must be in [1, " + std::to_string(n) + "]");
  }
  BatchPlan plan;
  plan.batch_size = batch_size;
  plan.order = RandomPermutation(n, shuffle_seed);
  const std::size_t count = (n + batch_size - 1) / batch_size;
  plan.batches.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t begin = b * batch_size;
    plan.batches.push_back({b, begin, std::min(n, begin + batch_size)});
  }
  return plan;
}

std::uint64_t EpochShuffleSeed(std::uint64_t seed, std::size_t epoch) {
  return DeriveSeed(seed, 0xba7c4000ULL + epoch);
}

}  // namespace splitpub
