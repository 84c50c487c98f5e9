// Copyright 2026 The embed-adapt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMBED_ADAPT_MLP_H_
#define EMBED_ADAPT_MLP_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "embed_adapt/embedding_set.h"
#include "embed_adapt/random.h"

namespace embed_adapt {

enum class Activation { kTanh, kRelu };

Activation ParseActivation(std::string_view name);  // "tanh" | "relu"
std::string_view ActivationName(Activation act);

struct DenseLayer {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd bias;     // fan_out
};

struct Architecture {
  std::size_t n_hidden = 1;
  std::size_t hidden_dim = 0;  // 0: same as the input dimension
  Activation activation = Activation::kTanh;

  // "1-layer tanh", "5-layer ReLU", ...
  std::string Label() const;
};

// Fully connected network: every hidden layer applies the activation, the
// output layer is affine. Row-vector convention, h_i = act(h_{i-1} W_i + b_i).
class MlpNetwork {
 public:
  MlpNetwork(std::vector<DenseLayer> layers, Activation activation);

  // All weights and biases zero.
  static MlpNetwork Zeros(std::size_t input_dim, std::size_t output_dim,
                          const Architecture& arch);
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static MlpNetwork GlorotUniform(std::size_t input_dim, std::size_t output_dim,
                                  const Architecture& arch, Rng& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t n_hidden() const { return layers_.size() - 1; }
  Activation activation() const { return activation_; }
  std::size_t ParameterCount() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  // Callers that edit parameters should call Validate() afterwards.
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  void Validate() const;

  Eigen::VectorXd Forward(std::span<const double> x) const;
  RowMatrix ForwardBatch(const RowMatrix& x) const;

  // Mean over rows and output dimensions of the squared error.
  double MeanSquaredError(const RowMatrix& x, const RowMatrix& z) const;

  // Same loss, plus its gradient with respect to every parameter (same
  // shapes as layers()).
  double LossAndGradient(const RowMatrix& x, const RowMatrix& z,
                         std::vector<DenseLayer>& gradient) const;

  friend bool operator==(const MlpNetwork& a, const MlpNetwork& b);

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_;
};

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive moment estimation over all network parameters.
class AdamOptimizer {
 public:
  AdamOptimizer(const AdamConfig& config, const MlpNetwork& network);

  void Step(MlpNetwork& network, const std::vector<DenseLayer>& gradient);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  std::size_t t_ = 0;
};

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_MLP_H_
