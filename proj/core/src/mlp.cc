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

#include "embed_adapt/mlp.h"

#include <cmath>

#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

void ApplyActivation(RowMatrix& a, Activation act) {
  if (act == Activation::kTanh) {
    a = a.array().tanh();
  } else {
    a = a.array().max(0.0);
  }
}

// Derivative expressed through the activation output h = act(a).
RowMatrix ActivationDerivative(const RowMatrix& h, Activation act) {
  if (act == Activation::kTanh) return (1.0 - h.array().square()).matrix();
  return (h.array() > 0.0).cast<double>().matrix();
}

std::vector<DenseLayer> ZerosLike(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                   Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> LayerShapes(
    std::size_t input_dim, std::size_t output_dim, const Architecture& arch) {
  if (arch.n_hidden == 0) throw UsageError("network needs at least one hidden layer");
  const std::size_t hidden = arch.hidden_dim == 0 ? input_dim : arch.hidden_dim;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < arch.n_hidden; ++i) {
    shapes.emplace_back(in, hidden);
    in = hidden;
  }
  shapes.emplace_back(in, output_dim);
  return shapes;
}

}  // namespace

Activation ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu" || name == "ReLU") return Activation::kRelu;
  throw UsageError("unknown activation '" + std::string(name) +
                   "' (expected tanh or relu)");
}

std::string_view ActivationName(Activation act) {
  return act == Activation::kTanh ? "tanh" : "relu";
}

std::string Architecture::Label() const {
  return std::to_string(n_hidden) + "-layer " +
         (activation == Activation::kTanh ? "tanh" : "ReLU");
}

MlpNetwork::MlpNetwork(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  Validate();
}

void MlpNetwork::Validate() const {
  if (layers_.size() < 2) {
    throw UsageError("network needs at least one hidden and one output layer");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0 ||
        l.bias.size() != l.weights.cols()) {
      throw DataError("layer " + std::to_string(i) + " has inconsistent shapes");
    }
    if (i > 0 && layers_[i - 1].weights.cols() != l.weights.rows()) {
      throw DataError("layer " + std::to_string(i) +
                      " does not chain with the previous layer");
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw NumericalError("layer " + std::to_string(i) +
                           " has non-finite parameters");
    }
  }
}

MlpNetwork MlpNetwork::Zeros(std::size_t input_dim, std::size_t output_dim,
                             const Architecture& arch) {
  std::vector<DenseLayer> layers;
  for (auto [in, out] : LayerShapes(input_dim, output_dim, arch)) {
    layers.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in),
                                            static_cast<Eigen::Index>(out)),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))});
  }
  return MlpNetwork(std::move(layers), arch.activation);
}

MlpNetwork MlpNetwork::GlorotUniform(std::size_t input_dim,
                                     std::size_t output_dim,
                                     const Architecture& arch, Rng& rng) {
  MlpNetwork net = Zeros(input_dim, output_dim, arch);
  for (auto& l : net.layers_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
        l.weights(r, c) = rng.Uniform(-limit, limit);
      }
    }
  }
  return net;
}

std::size_t MlpNetwork::input_dim() const {
  return static_cast<std::size_t>(layers_.front().weights.rows());
}

std::size_t MlpNetwork::output_dim() const {
  return static_cast<std::size_t>(layers_.back().weights.cols());
}

std::size_t MlpNetwork::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  }
  return n;
}

Eigen::VectorXd MlpNetwork::Forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw UsageError("dimension mismatch: network expects " +
                     std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(x.size()));
  }
  RowMatrix row = Eigen::Map<const RowMatrix>(x.data(), 1,
                                              static_cast<Eigen::Index>(x.size()));
  return ForwardBatch(row).row(0).transpose();
}

RowMatrix MlpNetwork::ForwardBatch(const RowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw UsageError("dimension mismatch: network expects " +
                     std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  RowMatrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    RowMatrix a = h * layers_[i].weights;
    a.rowwise() += layers_[i].bias.transpose();
    if (i + 1 < layers_.size()) ApplyActivation(a, activation_);
    h = std::move(a);
  }
  return h;
}

double MlpNetwork::MeanSquaredError(const RowMatrix& x,
                                    const RowMatrix& z) const {
  const RowMatrix out = ForwardBatch(x);
  if (out.rows() != z.rows() || out.cols() != z.cols()) {
    throw UsageError("target rows do not match network output shape");
  }
  return (out - z).squaredNorm() / static_cast<double>(z.size());
}

double MlpNetwork::LossAndGradient(const RowMatrix& x, const RowMatrix& z,
                                   std::vector<DenseLayer>& gradient) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim() ||
      static_cast<std::size_t>(z.cols()) != output_dim() || x.rows() != z.rows()) {
    throw UsageError("batch shapes do not match the network");
  }
  const std::size_t depth = layers_.size();
  // activations[i] is the input to layer i.
  std::vector<RowMatrix> activations;
  activations.reserve(depth);
  activations.push_back(x);
  RowMatrix out;
  for (std::size_t i = 0; i < depth; ++i) {
    RowMatrix a = activations.back() * layers_[i].weights;
    a.rowwise() += layers_[i].bias.transpose();
    if (i + 1 < depth) {
      ApplyActivation(a, activation_);
      activations.push_back(std::move(a));
    } else {
      out = std::move(a);
    }
  }

  const double scale = 1.0 / static_cast<double>(z.size());
  const RowMatrix diff = out - z;
  const double loss = diff.squaredNorm() * scale;

  if (gradient.size() != depth) gradient = ZerosLike(layers_);
  RowMatrix delta = 2.0 * scale * diff;
  for (std::size_t i = depth; i-- > 0;) {
    gradient[i].weights.noalias() = activations[i].transpose() * delta;
    gradient[i].bias = delta.colwise().sum().transpose();
    if (i > 0) {
      RowMatrix back = delta * layers_[i].weights.transpose();
      delta = back.cwiseProduct(ActivationDerivative(activations[i], activation_));
    }
  }
  return loss;
}

bool operator==(const MlpNetwork& a, const MlpNetwork& b) {
  if (a.activation_ != b.activation_ || a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& la = a.layers_[i];
    const auto& lb = b.layers_[i];
    if (la.weights.rows() != lb.weights.rows() ||
        la.weights.cols() != lb.weights.cols() || la.weights != lb.weights ||
        la.bias != lb.bias) {
      return false;
    }
  }
  return true;
}

AdamOptimizer::AdamOptimizer(const AdamConfig& config,
                             const MlpNetwork& network)
    : config_(config),
      m_(ZerosLike(network.layers())),
      v_(ZerosLike(network.layers())) {}

void AdamOptimizer::Step(MlpNetwork& network,
                         const std::vector<DenseLayer>& gradient) {
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= config_.step * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + config_.epsilon);
  };
  auto& layers = network.mutable_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weights, m_[i].weights, v_[i].weights, gradient[i].weights);
    update(layers[i].bias, m_[i].bias, v_[i].bias, gradient[i].bias);
  }
}

}  // namespace embed_adapt
