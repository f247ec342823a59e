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

#include "splitpub/mlp.h"

#include <algorithm>
#include <cmath>

#include "splitpub/errors.h"
#include "splitpub/rng.h"

namespace splitpub {
namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void ApplyActivation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::kIdentity:
      return;
    case Activation::kReLU:
      for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::kSigmoid:
      for (double& v : m.values()) v = Sigmoid(v);
      return;
  }
}

// dpre = dpost * act'(pre), using post where it is cheaper.
Matrix ActivationBackward(Activation act, const Matrix& pre, const Matrix& post,
                          const Matrix& dpost) {
  Matrix dpre = dpost;
  auto d = dpre.values();
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kReLU: {
      auto p = pre.values();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(p[i] > 0.0)) d[i] = 0.0;
      }
      break;
    }
    case Activation::kSigmoid: {
      auto s = post.values();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= s[i] * (1.0 - s[i]);
      break;
    }
  }
  return dpre;
}

void CheckLossShapes(const Matrix& predictions, const Matrix& labels,
                     const char* name) {
  if (predictions.cols() != 1 || labels.cols() != 1 ||
      predictions.rows() != labels.rows() || predictions.rows() == 0) {
    throw ConfigError(std::string(name) + ": predictions " +
                      std::to_string(predictions.rows()) + "x" +
                      std::to_string(predictions.cols()) +
                      " do not match labels " + std::to_string(labels.rows()) +
                      "x" + std::to_string(labels.cols()));
  }
  if (!predictions.AllFinite()) {
    throw TrainingAbort(std::string(name) + ": non-finite prediction");
  }
}

}  // namespace

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kReLU:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const DenseLayer& l = layers_[k];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols()) {
      throw ConfigError("layer " + std::to_string(k) +
                        ": bias must be 1 x output_dim");
    }
    if (k > 0 && layers_[k - 1].output_dim() != l.input_dim()) {
      throw ConfigError("layer " + std::to_string(k) + " input dim " +
                        std::to_string(l.input_dim()) +
                        " does not chain with previous output dim " +
                        std::to_string(layers_[k - 1].output_dim()));
    }
  }
}

MlpModel MlpModel::Create(std::span<const std::size_t> dims, Activation hidden,
                          Activation output, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("an MLP needs at least two dims");
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("MLP layer width must be positive");
  }
  Engine engine(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t fan_in = dims[k];
    const std::size_t fan_out = dims[k + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weight = Matrix(fan_in, fan_out);
    for (double& w : layer.weight.values()) {
      w = UniformRange(engine, -limit, limit);
    }
    layer.bias = Matrix(1, fan_out);
    layer.activation = (k + 2 == dims.size()) ? output : hidden;
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

DenseLayer& MlpModel::mutable_layer(std::size_t k) {
  BumpVersion();
  return layers_.at(k);
}

std::size_t MlpModel::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().input_dim();
}

std::size_t MlpModel::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().output_dim();
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

bool MlpModel::SameStructure(const MlpModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (!layers_[k].weight.SameShape(other.layers_[k].weight) ||
        layers_[k].activation != other.layers_[k].activation) {
      return false;
    }
  }
  return true;
}

ForwardResult Forward(const MlpModel& model, const Matrix& input) {
  if (model.depth() == 0) throw ConfigError("Forward on an empty model");
  if (input.cols() != model.input_dim()) {
    throw ConfigError("Forward: input has " + std::to_string(input.cols()) +
                      " columns, model expects " +
                      std::to_string(model.input_dim()));
  }
  ForwardResult result;
  result.tape.input = input;
  result.tape.pre_activations.reserve(model.depth());
  result.tape.post_activations.reserve(model.depth());
  const Matrix* x = &input;
  for (const DenseLayer& layer : model.layers()) {
    Matrix pre = MatMul(*x, layer.weight);
    AddRowBroadcast(pre, layer.bias);
    Matrix post = pre;
    ApplyActivation(layer.activation, post);
    result.tape.pre_activations.push_back(std::move(pre));
    result.tape.post_activations.push_back(std::move(post));
    x = &result.tape.post_activations.back();
  }
  result.output = result.tape.post_activations.back();
  return result;
}

Matrix Predict(const MlpModel& model, const Matrix& input) {
  if (input.cols() != model.input_dim()) {
    throw ConfigError("Predict: input has " + std::to_string(input.cols()) +
                      " columns, model expects " +
                      std::to_string(model.input_dim()));
  }
  Matrix x = input;
  for (const DenseLayer& layer : model.layers()) {
    Matrix pre = MatMul(x, layer.weight);
    AddRowBroadcast(pre, layer.bias);
    ApplyActivation(layer.activation, pre);
    x = std::move(pre);
  }
  return x;
}

BackwardResult Backward(const MlpModel& model, const ForwardTape& tape,
                        const Matrix& dloss_doutput) {
  if (tape.depth() != model.depth() ||
      tape.post_activations.size() != model.depth()) {
    throw ConfigError("Backward: tape depth " + std::to_string(tape.depth()) +
                      " does not match model depth " +
                      std::to_string(model.depth()));
  }
  for (std::size_t k = 0; k < model.depth(); ++k) {
    if (tape.pre_activations[k].cols() != model.layer(k).output_dim() ||
        tape.pre_activations[k].rows() != tape.batch_size()) {
      throw ConfigError("Backward: tape layer " + std::to_string(k) +
                        " was not produced by this model");
    }
  }
  if (!dloss_doutput.SameShape(tape.post_activations.back())) {
    throw ConfigError("Backward: output gradient shape mismatch");
  }

  BackwardResult result;
  result.grads.weight.resize(model.depth());
  result.grads.bias.resize(model.depth());
  Matrix upstream = dloss_doutput;
  for (std::size_t k = model.depth(); k-- > 0;) {
    const DenseLayer& layer = model.layer(k);
    Matrix dpre = ActivationBackward(layer.activation, tape.pre_activations[k],
                                     tape.post_activations[k], upstream);
    const Matrix& layer_input =
        k == 0 ? tape.input : tape.post_activations[k - 1];
    result.grads.weight[k] = MatMulTransA(layer_input, dpre);
    result.grads.bias[k] = ColumnSums(dpre);
    upstream = MatMulTransB(dpre, layer.weight);
  }
  result.input_grad = std::move(upstream);
  return result;
}

LossResult CrossEntropyLoss(const Matrix& predictions, const Matrix& labels) {
  CheckLossShapes(predictions, labels, "CrossEntropyLoss");
  const std::size_t n = predictions.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult result;
  result.gradient = Matrix(n, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = labels(i, 0);
    if (y != 0.0 && y != 1.0) {
      throw ConfigError("CrossEntropyLoss: label at row " + std::to_string(i) +
                        " is not 0 or 1");
    }
    const double p = std::clamp(predictions(i, 0), kProbabilityClamp,
                                1.0 - kProbabilityClamp);
    sum += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    // Derivative of the loss at the clamped point; the clamp only guards the
    // logarithms and does not zero the gradient of saturated predictions.
    result.gradient(i, 0) = (p - y) / (p * (1.0 - p)) * inv_n;
  }
  result.loss = -sum * inv_n;
  return result;
}

LossResult MseLoss(const Matrix& predictions, const Matrix& labels) {
  CheckLossShapes(predictions, labels, "MseLoss");
  const std::size_t n = predictions.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult result;
  result.gradient = Matrix(n, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = predictions(i, 0) - labels(i, 0);
    sum += diff * diff;
    result.gradient(i, 0) = 2.0 * diff * inv_n;
  }
  result.loss = sum * inv_n;
  return result;
}

void SgdStep(MlpModel& model, const ParamGrads& grads, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("SgdStep: learning rate must be positive and finite");
  }
  if (grads.weight.size() != model.depth() ||
      grads.bias.size() != model.depth()) {
    throw ConfigError("SgdStep: gradient depth does not match model");
  }
  for (std::size_t k = 0; k < model.depth(); ++k) {
    if (!grads.weight[k].SameShape(model.layer(k).weight) ||
        !grads.bias[k].SameShape(model.layer(k).bias)) {
      throw ConfigError("SgdStep: gradient shape mismatch at layer " +
                        std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < model.depth(); ++k) {
    DenseLayer& layer = model.mutable_layer(k);
    auto w = layer.weight.values();
    auto gw = grads.weight[k].values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * gw[i];
    auto b = layer.bias.values();
    auto gb = grads.bias[k].values();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= eta * gb[i];
  }
}

MlpModel AverageModels(std::span<const MlpModel> models) {
  if (models.empty()) throw ConfigError("AverageModels: empty model list");
  for (const MlpModel& m : models) {
    if (!m.SameStructure(models.front())) {
      throw ConfigError("AverageModels: models are not structurally identical");
    }
  }
  MlpModel result = models.front();
  if (models.size() == 1) {
    result.BumpVersion();
    return result;
  }
  std::vector<double> column(models.size());
  auto mean_of = [&column]() {
    if (std::all_of(column.begin(), column.end(),
                    [&](double v) { return v == column.front(); })) {
      return column.front();
    }
    // Summing in sorted order makes the mean independent of model order.
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v;
    return acc / static_cast<double>(column.size());
  };
  for (std::size_t k = 0; k < result.depth(); ++k) {
    DenseLayer& out = result.mutable_layer(k);
    auto w = out.weight.values();
    auto b = out.bias.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t m = 0; m < models.size(); ++m) {
        column[m] = models[m].layer(k).weight.values()[i];
      }
      w[i] = mean_of();
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t m = 0; m < models.size(); ++m) {
        column[m] = models[m].layer(k).bias.values()[i];
      }
      b[i] = mean_of();
    }
  }
  return result;
}

}  // namespace splitpub
