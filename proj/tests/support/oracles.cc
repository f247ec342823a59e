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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>

#include "splitpub/rng.h"

namespace splitpub::testing {
namespace {

double ApplyActivation(Activation a, double v) {
  switch (a) {
    case Activation::kReLU:
      return v > 0.0 ? v : 0.0;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-v));
    case Activation::kIdentity:
      return v;
  }
  return v;
}

double Objective(const MlpModel& model, const Matrix& x, const Matrix& r) {
  const Matrix out = Predict(model, x);
  double j = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) j += r.values()[k] * out.values()[k];
  return j;
}

// Sign pattern of every ReLU pre-activation.
std::vector<bool> ReluMask(const MlpModel& model, const Matrix& x) {
  const ForwardResult f = Forward(model, x);
  std::vector<bool> mask;
  for (std::size_t l = 0; l < model.depth(); ++l) {
    if (model.layer(l).activation != Activation::kReLU) continue;
    for (double v : f.tape.pre_activations[l].values()) mask.push_back(v > 0.0);
  }
  return mask;
}

}  // namespace

OracleStep MonolithicStep(SplitModels& models, const Matrix& xa,
                          const Matrix& xp, const Matrix& y, Task task,
                          double eta) {
  const ForwardResult zp = Forward(models.bottom_passive, xp);
  const ForwardResult za = Forward(models.bottom_active, xa);
  const ForwardResult g = Forward(models.top, ConcatColumns(za.output, zp.output));
  const LossResult loss = task == Task::kClassification
                              ? CrossEntropyLoss(g.output, y)
                              : MseLoss(g.output, y);
  const BackwardResult gb = Backward(models.top, g.tape, loss.gradient);
  const std::size_t split = za.output.cols();
  OracleStep step;
  step.loss = loss.loss;
  step.passive_gradient = SliceColumns(gb.input_grad, split, gb.input_grad.cols());
  const BackwardResult ab = Backward(models.bottom_active, za.tape,
                                     SliceColumns(gb.input_grad, 0, split));
  const BackwardResult pb =
      Backward(models.bottom_passive, zp.tape, step.passive_gradient);
  SgdStep(models.top, gb.grads, eta);
  SgdStep(models.bottom_active, ab.grads, eta);
  SgdStep(models.bottom_passive, pb.grads, eta);
  return step;
}

OracleRun MonolithicSplitTraining(const VerticalDataset& train,
                                  const TrainConfig& config) {
  OracleRun run;
  run.models = CreateSplitModels(config.arch, train.active_dim(),
                                 train.passive_dim(), train.task, config.seed);
  for (std::size_t t = 1; t <= config.epochs; ++t) {
    const BatchPlan plan = MakeBatchPlan(train.n(), config.batch_size,
                                         EpochShuffleSeed(config.seed, t));
    double loss_sum = 0.0;
    std::size_t rows = 0;
    for (std::size_t b = 0; b < plan.batch_count(); ++b) {
      const auto idx = plan.Indices(b);
      const OracleStep s = MonolithicStep(
          run.models, GatherRows(train.active_features, idx),
          GatherRows(train.passive_features, idx), GatherRows(train.labels, idx),
          train.task, config.learning_rate);
      loss_sum += s.loss * static_cast<double>(idx.size());
      rows += idx.size();
    }
    run.epoch_losses.push_back(loss_sum / static_cast<double>(rows));
  }
  return run;
}

GradCheck CheckGradients(const MlpModel& model, const Matrix& x,
                         const Matrix& r, double h) {
  const ForwardResult f = Forward(model, x);
  const BackwardResult back = Backward(model, f.tape, r);
  const std::vector<bool> base_mask = ReluMask(model, x);
  GradCheck out;

  auto compare = [&](double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / scale);
    ++out.checked;
  };

  for (std::size_t l = 0; l < model.depth(); ++l) {
    for (int which = 0; which < 2; ++which) {
      const std::size_t count = which == 0 ? model.layer(l).weight.size()
                                           : model.layer(l).bias.size();
      for (std::size_t k = 0; k < count; ++k) {
        MlpModel plus = model;
        MlpModel minus = model;
        auto param = [&](MlpModel& m) -> double& {
          DenseLayer& layer = m.mutable_layer(l);
          return (which == 0 ? layer.weight : layer.bias).values()[k];
        };
        param(plus) += h;
        param(minus) -= h;
        if (ReluMask(plus, x) != base_mask || ReluMask(minus, x) != base_mask) {
          ++out.skipped_kinks;
          continue;
        }
        const double numeric = (Objective(plus, x, r) - Objective(minus, x, r)) / (2 * h);
        const double analytic = which == 0 ? back.grads.weight[l].values()[k]
                                           : back.grads.bias[l].values()[k];
        compare(analytic, numeric);
      }
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    Matrix xp = x;
    Matrix xm = x;
    xp.values()[k] += h;
    xm.values()[k] -= h;
    if (ReluMask(model, xp) != base_mask || ReluMask(model, xm) != base_mask) {
      ++out.skipped_kinks;
      continue;
    }
    const double numeric = (Objective(model, xp, r) - Objective(model, xm, r)) / (2 * h);
    compare(back.input_grad.values()[k], numeric);
  }
  return out;
}

double PairCountAuc(const std::vector<double>& scores,
                    const std::vector<double>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

Matrix LoopForward(const MlpModel& model, const Matrix& x) {
  Matrix cur = x;
  for (const DenseLayer& layer : model.layers()) {
    Matrix next(cur.rows(), layer.output_dim());
    for (std::size_t i = 0; i < cur.rows(); ++i) {
      for (std::size_t j = 0; j < layer.output_dim(); ++j) {
        double acc = layer.bias(0, j);
        for (std::size_t k = 0; k < layer.input_dim(); ++k) {
          acc += cur(i, k) * layer.weight(k, j);
        }
        next(i, j) = ApplyActivation(layer.activation, acc);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                    double lo, double hi) {
  Engine engine(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = UniformRange(engine, lo, hi);
  return m;
}

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
  c.cores_active = 32.0;
  c.cores_passive = 32.0;
  c.embedding_bytes = 1048576.0;
  c.gradient_bytes = 1048576.0;
  c.bandwidth = 1e9;
  c.reference_batch = 256.0;
  c.mem_active_base = 1e6;
  c.mem_passive_base = 1e6;
  c.rho_active = 1e3;
  c.rho_passive = 1e3;
  c.chi = 1.0;
  c.mem_active_cap = 1e7;
  c.mem_passive_cap = 1e7;
  return c;
}

DelayModelConstants RandomConstants(std::uint64_t seed) {
  Engine e(seed);
  auto coef = [&] { return std::exp(UniformRange(e, std::log(1e-3), std::log(1.0))); };
  auto expo = [&] { return UniformRange(e, -1.2, 0.6); };
  DelayModelConstants c;
  c.lambda_a = coef();
  c.gamma_a = expo();
  c.lambda_p = coef();
  c.gamma_p = expo();
  c.lambda_a_top = coef();
  c.gamma_a_top = expo();
  c.phi_a = coef();
  c.beta_a = expo();
  c.phi_p = coef();
  c.beta_p = expo();
  c.phi_a_top = coef();
  c.beta_a_top = expo();
  c.cores_active = 1.0 + static_cast<double>(UniformIndex(e, 64));
  c.cores_passive = 1.0 + static_cast<double>(UniformIndex(e, 64));
  c.embedding_bytes = UniformRange(e, 0.0, 1e7);
  c.gradient_bytes = UniformRange(e, 0.0, 1e7);
  c.bandwidth = UniformRange(e, 1e6, 1e9);
  c.reference_batch = 256.0;
  c.chi = UniformIndex(e, 2) ? 1.0 : 2.0;
  c.mem_active_base = UniformRange(e, 0.0, 1e3);
  c.mem_passive_base = UniformRange(e, 0.0, 1e3);
  c.rho_active = UniformRange(e, 0.1, 2.0);
  c.rho_passive = UniformRange(e, 0.1, 2.0);
  const double target = std::exp(UniformRange(e, std::log(8.0), std::log(2048.0)));
  c.mem_active_cap = c.mem_active_base + c.rho_active * std::pow(target, c.chi) * 1.01;
  c.mem_passive_cap =
      c.mem_passive_base + c.rho_passive * std::pow(target, c.chi) * UniformRange(e, 1.0, 2.0);
  return c;
}

}  // namespace splitpub::testing
