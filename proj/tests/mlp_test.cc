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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "embed_adapt/error.h"
#include "embed_adapt/mlp.h"
#include "gradient_check.h"
#include "oracles.h"
#include "test_util.h"

namespace embed_adapt {
namespace {

using testing::GaussianMatrix;

Architecture Arch(std::size_t n_hidden, Activation act, std::size_t hidden = 0) {
  Architecture arch;
  arch.n_hidden = n_hidden;
  arch.activation = act;
  arch.hidden_dim = hidden;
  return arch;
}

TEST_CASE("labels and activation names") {
  CHECK(Arch(5, Activation::kRelu).Label() == "5-layer ReLU");
  CHECK(Arch(1, Activation::kTanh).Label() == "1-layer tanh");
  CHECK(ParseActivation("tanh") == Activation::kTanh);
  CHECK(ParseActivation("relu") == Activation::kRelu);
  CHECK(ActivationName(Activation::kRelu) == "relu");
  CHECK_THROWS_AS(ParseActivation("sigmoid"), UsageError);
}

TEST_CASE("shapes chain from input to output") {
  Rng rng(1);
  auto net = MlpNetwork::GlorotUniform(6, 4, Arch(5, Activation::kRelu), rng);
  CHECK(net.n_hidden() == 5);
  CHECK(net.input_dim() == 6);
  CHECK(net.output_dim() == 4);
  CHECK(net.layers().size() == 6);
  CHECK(net.layers()[0].weights.cols() == 6);
  CHECK(net.ParameterCount() == 5 * (36 + 6) + 24 + 4);
  auto wide = MlpNetwork::Zeros(3, 2, Arch(1, Activation::kTanh, 7));
  CHECK(wide.layers()[0].weights.cols() == 7);
  CHECK_THROWS_AS(MlpNetwork::Zeros(3, 2, Arch(0, Activation::kTanh)), UsageError);
}

TEST_CASE("glorot init stays within the limit with zero biases") {
  Rng rng(2);
  auto net = MlpNetwork::GlorotUniform(10, 30, Arch(2, Activation::kTanh, 20), rng);
  for (const auto& l : net.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
    CHECK(l.weights.cwiseAbs().maxCoeff() <= limit);
    CHECK(l.weights.cwiseAbs().maxCoeff() > 0.5 * limit);
    CHECK(l.bias.isZero(0.0));
  }
  Rng again(2);
  CHECK(net == MlpNetwork::GlorotUniform(10, 30, Arch(2, Activation::kTanh, 20), again));
}

TEST_CASE("all-zero network outputs zero") {
  Rng rng(3);
  for (auto act : {Activation::kTanh, Activation::kRelu}) {
    auto net = MlpNetwork::Zeros(5, 5, Arch(5, act));
    auto x = GaussianMatrix(1, 5, rng);
    CHECK(net.Forward(std::span<const double>(x.data(), 5)).isZero(0.0));
  }
}

TEST_CASE("hand-set tanh network matches hand computation") {
  DenseLayer hidden{Eigen::MatrixXd{{0.5, -1.0}, {2.0, 0.25}}, Eigen::VectorXd{{0.1, -0.2}}};
  DenseLayer out{Eigen::MatrixXd{{1.5, 0.0}, {-0.5, 1.0}}, Eigen::VectorXd{{0.3, 0.4}}};
  MlpNetwork net({hidden, out}, Activation::kTanh);
  std::vector<double> x = {1.0, -2.0};
  // Pre-activations: 0.5 - 4 + 0.1 = -3.4 and -1 - 0.5 - 0.2 = -1.7.
  const double h0 = std::tanh(-3.4), h1 = std::tanh(-1.7);
  const Eigen::VectorXd y = net.Forward(x);
  CHECK(std::fabs(y[0] - (1.5 * h0 - 0.5 * h1 + 0.3)) <= 1e-12);
  CHECK(std::fabs(y[1] - (h1 + 0.4)) <= 1e-12);
}

TEST_CASE("relu with negative hidden pre-activations outputs the output bias") {
  Rng rng(4);
  auto net = MlpNetwork::GlorotUniform(4, 3, Arch(1, Activation::kRelu), rng);
  auto& layers = net.mutable_layers();
  layers[0].weights.setZero();
  layers[0].bias.setConstant(-1.0);
  layers[1].bias = Eigen::VectorXd{{0.7, -0.3, 2.0}};
  auto x = GaussianMatrix(1, 4, rng);
  CHECK(net.Forward(std::span<const double>(x.data(), 4)) == layers[1].bias);
}

TEST_CASE("batch forward and loss agree with the long-double oracle") {
  Rng rng(5);
  for (auto act : {Activation::kTanh, Activation::kRelu}) {
    auto net = MlpNetwork::GlorotUniform(6, 3, Arch(3, act), rng);
    const RowMatrix x = GaussianMatrix(10, 6, rng);
    const RowMatrix z = GaussianMatrix(10, 3, rng);
    const double mse = net.MeanSquaredError(x, z);
    const long double expected = testing::OracleMlpLoss(
        net.layers(), act, Eigen::MatrixXd(x), Eigen::MatrixXd(z));
    CHECK(std::fabs(mse - static_cast<double>(expected)) <= 1e-12);
    std::vector<DenseLayer> grad;
    CHECK(net.LossAndGradient(x, z, grad) == doctest::Approx(mse).epsilon(1e-14));
    const RowMatrix batch = net.ForwardBatch(x);
    for (Eigen::Index r = 0; r < 10; ++r) {
      const Eigen::VectorXd single = net.Forward(std::span<const double>(x.data() + r * 6, 6));
      CHECK((batch.row(r).transpose() - single).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("forward errors") {
  auto net = MlpNetwork::Zeros(3, 2, Arch(1, Activation::kTanh));
  std::vector<double> x(4, 0.0);
  CHECK_THROWS_AS(net.Forward(x), UsageError);
  CHECK_THROWS_AS(net.ForwardBatch(RowMatrix::Zero(2, 2)), UsageError);
  std::vector<DenseLayer> grad;
  CHECK_THROWS_AS(net.LossAndGradient(RowMatrix::Zero(2, 3), RowMatrix::Zero(3, 2), grad),
                  UsageError);
  DenseLayer a{Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::Zero(4)};
  DenseLayer b{Eigen::MatrixXd::Zero(5, 2), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(MlpNetwork({a, b}, Activation::kTanh), DataError);
  CHECK_THROWS_AS(MlpNetwork({a}, Activation::kTanh), UsageError);
  DenseLayer bad{Eigen::MatrixXd::Constant(4, 2, std::nan("")), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(MlpNetwork({a, bad}, Activation::kTanh), NumericalError);
}

TEST_CASE("gradients match finite differences on a 3-layer toy network") {
  Rng rng(6);
  for (auto act : {Activation::kTanh, Activation::kRelu}) {
    auto result = testing::CheckMlpGradient(Arch(3, act), 4, 3, 6, 150, rng);
    CHECK(result.checked == 150);
    CHECK(result.max_relative_error <= 1e-4);
  }
}

TEST_CASE("gradients match finite differences for 1 and 5 hidden layers") {
  Rng rng(7);
  for (std::size_t layers : {1, 5}) {
    for (auto act : {Activation::kTanh, Activation::kRelu}) {
      auto result = testing::CheckMlpGradient(Arch(layers, act), 8, 8, 10, 200, rng);
      CAPTURE(layers);
      CHECK(result.checked == 200);
      CHECK(result.max_relative_error <= 1e-4);
    }
  }
}

TEST_CASE("adam first step moves each parameter by the step size") {
  Rng rng(8);
  auto net = MlpNetwork::GlorotUniform(3, 2, Arch(1, Activation::kTanh), rng);
  const auto before = net;
  const RowMatrix x = GaussianMatrix(4, 3, rng);
  const RowMatrix z = GaussianMatrix(4, 2, rng);
  std::vector<DenseLayer> grad;
  net.LossAndGradient(x, z, grad);
  AdamOptimizer adam(AdamConfig{}, net);
  adam.Step(net, grad);
  CHECK(adam.steps() == 1);
  // With bias correction, the first update is step * g / (|g| + eps').
  for (std::size_t li = 0; li < 2; ++li) {
    const auto& g = grad[li].weights;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double expected = -1e-3 * g.data()[i] / (std::fabs(g.data()[i]) + 1e-8);
      const double moved = net.layers()[li].weights.data()[i] -
                           before.layers()[li].weights.data()[i];
      CHECK(moved == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("adam reduces the loss on a small regression") {
  Rng rng(9);
  auto net = MlpNetwork::GlorotUniform(4, 4, Arch(1, Activation::kTanh), rng);
  const RowMatrix x = GaussianMatrix(40, 4, rng, 0.5);
  const RowMatrix z = x;
  AdamConfig config;
  config.step = 1e-2;
  AdamOptimizer adam(config, net);
  const double initial = net.MeanSquaredError(x, z);
  std::vector<DenseLayer> grad;
  for (int i = 0; i < 500; ++i) {
    net.LossAndGradient(x, z, grad);
    adam.Step(net, grad);
  }
  CHECK(net.MeanSquaredError(x, z) < 0.05 * initial);
}

}  // namespace
}  // namespace embed_adapt
