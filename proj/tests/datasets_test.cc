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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "splitpub/datasets.h"
#include "splitpub/errors.h"
#include "splitpub/metrics.h"
#include "splitpub/mlp.h"
#include "support/oracles.h"

namespace splitpub {
namespace {

namespace fs = std::filesystem;

std::string TempPath(const std::string& name) {
  return (fs::temp_directory_path() / ("splitpub_" + name)).string();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(SyntheticTest, RejectsEmptyAndBadOptions) {
  SyntheticOptions o;
  o.n = 0;
  EXPECT_THROW(GenerateSynthetic(o), ConfigError);
  o.n = 10;
  o.n_informative = 0;
  EXPECT_THROW(GenerateSynthetic(o), ConfigError);
}

TEST(SyntheticTest, DeterministicInSeed) {
  SyntheticOptions o;
  o.n = 200;
  o.d = 8;
  o.n_informative = 3;
  o.seed = 42;
  const LabeledData a = GenerateSynthetic(o);
  const LabeledData b = GenerateSynthetic(o);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  o.seed = 43;
  EXPECT_NE(GenerateSynthetic(o).features, a.features);
}

TEST(SyntheticTest, ShapesAndBinaryLabels) {
  SyntheticOptions o;
  o.n = 300;
  o.d = 7;
  o.n_informative = 2;
  const LabeledData data = GenerateSynthetic(o);
  EXPECT_EQ(data.n(), 300u);
  EXPECT_EQ(data.d(), 7u);
  EXPECT_EQ(data.labels.rows(), 300u);
  for (double y : data.labels.values()) EXPECT_TRUE(y == 0.0 || y == 1.0);
  o.task = Task::kRegression;
  const LabeledData reg = GenerateSynthetic(o);
  EXPECT_EQ(reg.task, Task::kRegression);
  EXPECT_TRUE(reg.labels.AllFinite());
}

TEST(SyntheticTest, SingleLayerModelLearnsTheSignal) {
  SyntheticOptions o;
  o.n = 10000;
  o.d = 50;
  o.seed = 5;
  const LabeledData data = GenerateSynthetic(o);
  const RowSplit split = SplitRows(data, 0.7, 6);
  const std::vector<std::size_t> dims = {50, 1};
  MlpModel model = MlpModel::Create(dims, Activation::kReLU, Activation::kSigmoid, 7);
  for (std::size_t epoch = 1; epoch <= 3; ++epoch) {
    const BatchPlan plan = MakeBatchPlan(split.train.n(), 64, epoch);
    for (std::size_t b = 0; b < plan.batch_count(); ++b) {
      const auto idx = plan.Indices(b);
      const ForwardResult f = Forward(model, GatherRows(split.train.features, idx));
      const LossResult l = CrossEntropyLoss(f.output, GatherRows(split.train.labels, idx));
      SgdStep(model, Backward(model, f.tape, l.gradient).grads, 0.05);
    }
  }
  const Matrix scores = Predict(model, split.test.features);
  const std::vector<double> s(scores.values().begin(), scores.values().end());
  const std::vector<double> y(split.test.labels.values().begin(),
                              split.test.labels.values().end());
  EXPECT_GT(testing::PairCountAuc(s, y), 0.8);
}

TEST(CsvTest, HandWrittenFileLoadsExactly) {
  const std::string path = TempPath("hand.csv");
  WriteText(path, "a,label,b\n1.5,1,2\n-3,0,4e2\n0,1,0.25\n");
  const LabeledData d = LoadCsv(path, "label", Task::kClassification);
  EXPECT_EQ(d.features, Matrix::FromRows({{1.5, 2}, {-3, 400}, {0, 0.25}}));
  EXPECT_EQ(d.labels, Matrix::FromRows({{1}, {0}, {1}}));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
  fs::remove(path);
}

TEST(CsvTest, BadCellNamesRowAndColumn) {
  const std::string path = TempPath("bad.csv");
  WriteText(path, "a,b,label\n1,2,0\n3,4,x\n");
  try {
    LoadCsv(path, "label", Task::kClassification);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 2"), std::string::npos) << what;
    EXPECT_NE(what.find("column 3"), std::string::npos) << what;
  }
  fs::remove(path);
}

TEST(CsvTest, MissingFileAndMissingLabelColumn) {
  EXPECT_THROW(LoadCsv(TempPath("does_not_exist.csv"), "label", Task::kRegression),
               ConfigError);
  const std::string path = TempPath("nolabel.csv");
  WriteText(path, "a,b\n1,2\n");
  EXPECT_THROW(LoadCsv(path, "label", Task::kRegression), ConfigError);
  fs::remove(path);
}

TEST(CsvTest, WriteThenLoadRoundTrips) {
  SyntheticOptions o;
  o.n = 50;
  o.d = 4;
  o.n_informative = 2;
  o.task = Task::kRegression;
  const LabeledData data = GenerateSynthetic(o);
  const std::string path = TempPath("roundtrip.csv");
  WriteCsv(path, data, "target");
  const LabeledData back = LoadCsv(path, "target", Task::kRegression);
  ASSERT_TRUE(back.features.SameShape(data.features));
  for (std::size_t k = 0; k < data.features.size(); ++k) {
    EXPECT_NEAR(back.features.values()[k], data.features.values()[k], 1e-9);
  }
  for (std::size_t k = 0; k < data.labels.size(); ++k) {
    EXPECT_NEAR(back.labels.values()[k], data.labels.values()[k], 1e-9);
  }
  fs::remove(path);
}

TEST(VerticalSplitTest, TwoColumnsGoOneEach) {
  LabeledData d;
  d.features = Matrix::FromRows({{1, 2}, {3, 4}});
  d.labels = Matrix::FromRows({{0}, {1}});
  const VerticalDataset v = VerticalSplit(d, 1, 3);
  EXPECT_EQ(v.active_dim(), 1u);
  EXPECT_EQ(v.passive_dim(), 1u);
  EXPECT_EQ(v.n(), 2u);
  EXPECT_EQ(v.active_features.rows(), v.passive_features.rows());
}

TEST(VerticalSplitTest, ColumnsPartitionTheOriginalSet) {
  const ColumnSplit s = MakeColumnSplit(10, 4, 9);
  std::set<std::size_t> all(s.active.begin(), s.active.end());
  all.insert(s.passive.begin(), s.passive.end());
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9u);
  EXPECT_EQ(s.active.size(), 4u);
  EXPECT_EQ(s.passive.size(), 6u);
}

TEST(VerticalSplitTest, HeterogeneousFiftyToFourHundredFifty) {
  SyntheticOptions o;
  o.n = 20;
  o.d = 500;
  o.n_informative = 50;
  const VerticalDataset v = VerticalSplit(GenerateSynthetic(o), 50, 1);
  EXPECT_EQ(v.active_dim(), 50u);
  EXPECT_EQ(v.passive_dim(), 450u);
}

TEST(VerticalSplitTest, RejectsEmptyParty) {
  EXPECT_THROW(MakeColumnSplit(5, 0, 1), ConfigError);
  EXPECT_THROW(MakeColumnSplit(5, 5, 1), ConfigError);
}

TEST(RowSplitTest, SeventyThirty) {
  SyntheticOptions o;
  o.n = 1000;
  o.d = 3;
  o.n_informative = 1;
  const RowSplit s = SplitRows(GenerateSynthetic(o), 0.7, 2);
  EXPECT_EQ(s.train.n(), 700u);
  EXPECT_EQ(s.test.n(), 300u);
  EXPECT_THROW(SplitRows(GenerateSynthetic(o), 1.0, 2), ConfigError);
}

TEST(StandardizerTest, TrainColumnsBecomeZeroMeanUnitVariance) {
  Matrix m = testing::RandomMatrix(100, 3, 4, -5.0, 20.0);
  const Standardizer s = Standardizer::Fit(m);
  s.Apply(m);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < 100; ++r) mean += m(r, c);
    mean /= 100.0;
    double var = 0.0;
    for (std::size_t r = 0; r < 100; ++r) var += (m(r, c) - mean) * (m(r, c) - mean);
    var /= 100.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-9);
  }
}

TEST(BatchPlanTest, CeilingArithmetic) {
  const BatchPlan p = MakeBatchPlan(1000, 256, 1);
  ASSERT_EQ(p.batch_count(), 4u);
  EXPECT_EQ(p.batches[0].size(), 256u);
  EXPECT_EQ(p.batches[1].size(), 256u);
  EXPECT_EQ(p.batches[2].size(), 256u);
  EXPECT_EQ(p.batches[3].size(), 232u);
  EXPECT_EQ(MakeBatchPlan(300, 300, 1).batch_count(), 1u);
  EXPECT_EQ(MakeBatchPlan(60021, 512, 1).batch_count(), 118u);
}

TEST(BatchPlanTest, EverySampleInExactlyOneBatchAndIdsAreDense) {
  const BatchPlan p = MakeBatchPlan(777, 50, 3);
  std::vector<int> seen(777, 0);
  for (std::size_t b = 0; b < p.batch_count(); ++b) {
    EXPECT_EQ(p.batches[b].batch_id, b);
    for (std::size_t i : p.Indices(b)) ++seen[i];
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(BatchPlanTest, SameSeedSamePlanDifferentEpochDifferentOrder) {
  EXPECT_EQ(MakeBatchPlan(100, 10, 5).order, MakeBatchPlan(100, 10, 5).order);
  EXPECT_NE(MakeBatchPlan(100, 10, EpochShuffleSeed(1, 1)).order,
            MakeBatchPlan(100, 10, EpochShuffleSeed(1, 2)).order);
}

TEST(BatchPlanTest, RejectsBadBatchSize) {
  EXPECT_THROW(MakeBatchPlan(10, 0, 1), ConfigError);
  EXPECT_THROW(MakeBatchPlan(10, 11, 1), ConfigError);
}

TEST(TaskTest, ParseAndName) {
  EXPECT_EQ(ParseTask(TaskName(Task::kRegression)), Task::kRegression);
  EXPECT_EQ(ParseTask(TaskName(Task::kClassification)), Task::kClassification);
  EXPECT_THROW(ParseTask("ranking"), ConfigError);
}

}  // namespace
}  // namespace splitpub
