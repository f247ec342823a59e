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

#include <benchmark/benchmark.h>

#include <chrono>
#include <cstddef>
#include <random>
#include <vector>

#include "splitpub/broker.h"
#include "splitpub/mlp.h"
#include "splitpub/planner.h"
#include "splitpub/profiler.h"
#include "splitpub/tensor.h"

namespace splitpub {
namespace {

Matrix Gaussian(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(engine);
  return m;
}

MlpModel BottomModel() {
  const std::vector<std::size_t> dims = {25, 32, 512};
  return MlpModel::Create(dims, Activation::kReLU, Activation::kIdentity, 1);
}

void BM_MlpForward(benchmark::State& state) {
  const MlpModel model = BottomModel();
  const Matrix x = Gaussian(state.range(0), 25, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(model, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->RangeMultiplier(4)->Range(16, 1024);

void BM_MlpBackward(benchmark::State& state) {
  const MlpModel model = BottomModel();
  const Matrix x = Gaussian(state.range(0), 25, 2);
  const ForwardResult fwd = Forward(model, x);
  const Matrix upstream = Gaussian(state.range(0), fwd.output.cols(), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Backward(model, fwd.tape, upstream));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackward)->RangeMultiplier(4)->Range(16, 1024);

void BM_BrokerPublishSubscribe(benchmark::State& state) {
  const std::size_t rows = state.range(0);
  Broker broker({1, 5, 5});
  const Matrix payload = Gaussian(rows, 512, 4);
  for (auto _ : state) {
    ChannelMessage m;
    m.batch_id = 0;
    m.kind = MessageKind::kEmbedding;
    m.payload = payload;
    m.sample_range = {0, rows};
    broker.Publish(std::move(m));
    benchmark::DoNotOptimize(
        broker.Subscribe(MessageKind::kEmbedding, 0, std::chrono::seconds(1)));
  }
  state.SetBytesProcessed(state.iterations() * rows * 512 * sizeof(double));
}
BENCHMARK(BM_BrokerPublishSubscribe)->Arg(16)->Arg(256)->Arg(1024);

DelayModelConstants ReferenceConstants() {
  DelayModelConstants c;
  c.lambda_a = 0.018;
  c.gamma_a = -0.8015;
  c.lambda_p = 0.010;
  c.gamma_p = -1.0071;
  c.lambda_a_top = 0.011;
  c.gamma_a_top = -0.7514;
  c.phi_a = 0.066;
  c.beta_a = -0.6069;
  c.phi_p = 0.038;
  c.beta_p = -1.0546;
  c.phi_a_top = 0.072;
  c.beta_a_top = -0.7834;
  c.cores_active = c.cores_passive = 32;
  c.embedding_bytes = c.gradient_bytes = 1 << 20;
  c.bandwidth = 1e9;
  c.reference_batch = 256;
  c.mem_active_base = c.mem_passive_base = 1e6;
  c.rho_active = c.rho_passive = 1e3;
  c.chi = 1;
  c.mem_active_cap = c.mem_passive_cap = 1e7;
  return c;
}

void BM_DpSearch(benchmark::State& state) {
  const DelayModelConstants c = ReferenceConstants();
  SearchSpace space;
  space.wa_max = space.wp_max = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(DpSearch(c, space));
}
BENCHMARK(BM_DpSearch)->Arg(10)->Arg(50);

void BM_BruteForceSearch(benchmark::State& state) {
  const DelayModelConstants c = ReferenceConstants();
  SearchSpace space;
  space.wa_max = space.wp_max = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(BruteForceSearch(c, space));
}
BENCHMARK(BM_BruteForceSearch)->Arg(10)->Arg(50);

}  // namespace
}  // namespace splitpub

BENCHMARK_MAIN();
