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

#include "splitpub/tensor.h"

namespace splitpub {

enum class Activation { kReLU, kSigmoid, kIdentity };

std::string ActivationName(Activation a);

// y = act(x * weight + bias); weight is (in x out), bias is (1 x out).
struct DenseLayer {
  Matrix weight;
  Matrix bias;
  Activation activation = Activation::kIdentity;

  std::size_t input_dim() const { return weight.rows(); }
  std::size_t output_dim() const { return weight.cols(); }
};

// A feed-forward stack of dense layers. Copying yields an independent deep
// copy; replicas held by different workers never share storage.
class MlpModel {
 public:
  MlpModel() = default;
  // Throws ConfigError unless consecutive layer dimensions chain.
  explicit MlpModel(std::vector<DenseLayer> layers);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  // `dims` lists layer widths including input and output, so a model with
  // k layers takes k + 1 dims.
  static MlpModel Create(std::span<const std::size_t> dims, Activation hidden,
                         Activation output, std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(std::size_t k) const { return layers_.at(k); }
  // Mutable access counts as a parameter write and bumps the version.
  DenseLayer& mutable_layer(std::size_t k);

  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  std::uint64_t version() const { return version_; }
  void BumpVersion() { ++version_; }

  bool SameStructure(const MlpModel& other) const;

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

// Intermediates of one forward pass: the batch input plus each layer's
// pre- and post-activation values.
struct ForwardTape {
  Matrix input;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> post_activations;

  std::size_t depth() const { return pre_activations.size(); }
  std::size_t batch_size() const { return input.rows(); }
};

struct ForwardResult {
  Matrix output;
  ForwardTape tape;
};

ForwardResult Forward(const MlpModel& model, const Matrix& input);
// Forward without recording a tape.
Matrix Predict(const MlpModel& model, const Matrix& input);

struct ParamGrads {
  std::vector<Matrix> weight;
  std::vector<Matrix> bias;
};

struct BackwardResult {
  ParamGrads grads;
  Matrix input_grad;
};

// Exact backpropagation through `model` given the tape of a forward pass on
// the same model and the loss gradient w.r.t. the model output.
BackwardResult Backward(const MlpModel& model, const ForwardTape& tape,
                        const Matrix& dloss_doutput);

struct LossResult {
  double loss = 0.0;
  Matrix gradient;  // d loss / d predictions
};

// Predictions are clamped to [kProbabilityClamp, 1 - kProbabilityClamp]
// before taking logs.
inline constexpr double kProbabilityClamp = 1e-12;

// Mean binary cross-entropy over n x 1 predictions and {0,1} labels.
LossResult CrossEntropyLoss(const Matrix& predictions, const Matrix& labels);
// Mean squared error over n x 1 predictions.
LossResult MseLoss(const Matrix& predictions, const Matrix& labels);

// params -= eta * grads. eta must be positive.
void SgdStep(MlpModel& model, const ParamGrads& grads, double eta);

// Elementwise mean of structurally identical models.
MlpModel AverageModels(std::span<const MlpModel> models);

}  // namespace splitpub
