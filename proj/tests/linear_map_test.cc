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


#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "embed_adapt/error.h"
#include "embed_adapt/linear_map.h"
#include "embed_adapt/similarity.h"
#include "oracles.h"
#include "test_util.h"

namespace embed_adapt {
namespace {

using testing::GaussianMatrix;
using testing::MakeWords;
using testing::RandomOrthogonal;
using testing::RandomSet;

constexpr Preprocess kRaw{false, false};

double MaxAbs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double OrthogonalityDefect(const Eigen::MatrixXd& w) {
  return MaxAbs(w.transpose() * w - Eigen::MatrixXd::Identity(w.cols(), w.cols()));
}

struct RotationInstance {
  EmbeddingSet source;
  EmbeddingSet target;
  Eigen::MatrixXd rotation;
};

RotationInstance MakeRotation(std::size_t n, std::size_t d, Rng& rng) {
  auto source = RandomSet(n, d, rng);
  Eigen::MatrixXd r = RandomOrthogonal(d, rng);
  RowMatrix z = source.matrix() * r;
  return {source, EmbeddingSet(source.vocab(), z), r};
}

TEST_CASE("mode names") {
  CHECK(ParseMapMode("ls") == MapMode::kLeastSquares);
  CHECK(ParseMapMode("orthogonal") == MapMode::kOrthogonal);
  CHECK(MapModeName(MapMode::kLeastSquares) == "ls");
  CHECK_THROWS_AS(ParseMapMode("svd"), UsageError);
}

TEST_CASE("procrustes of a set onto itself is the identity") {
  Rng rng(1);
  auto set = RandomSet(50, 6, rng);
  auto dict = BuildDictionary(set, set);
  auto fit = FitLinear(set, set, dict, MapMode::kOrthogonal, kRaw);
  CHECK(MaxAbs(fit.map.weights - Eigen::MatrixXd::Identity(6, 6)) <= 1e-8);
  CHECK_FALSE(fit.map.source_mean.has_value());
}

TEST_CASE("procrustes recovers a planted rotation") {
  Rng rng(2);
  for (auto preprocess : {kRaw, Preprocess{}}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto inst = MakeRotation(200, 10, rng);
      auto dict = BuildDictionary(inst.source, inst.target);
      auto fit = FitLinear(inst.source, inst.target, dict, MapMode::kOrthogonal,
                           preprocess);
      CHECK(MaxAbs(fit.map.weights - inst.rotation) <= 1e-6);
      CHECK(OrthogonalityDefect(fit.map.weights) <= 1e-8);
      CHECK(fit.warnings.empty());

      auto mapped = ApplyLinear(fit.map, inst.source);
      const RowMatrix target_pre =
          PreprocessRows(inst.target.matrix(), preprocess.unit_normalize,
                         fit.map.target_mean);
      for (std::size_t i = 0; i < mapped.size(); ++i) {
        std::span<const double> z(target_pre.data() + i * 10, 10);
        CHECK(Cosine(mapped.row(i), z) >= 0.999);
      }
    }
  }
}

TEST_CASE("least squares matches the normal-equation oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto source = RandomSet(20, 4, rng);
    EmbeddingSet target(source.vocab(), GaussianMatrix(20, 3, rng));
    auto dict = BuildDictionary(source, target);
    auto fit = FitLinear(source, target, dict, MapMode::kLeastSquares, kRaw);
    const Eigen::MatrixXd expected = testing::NormalEquationSolve(
        Eigen::MatrixXd(source.matrix()), Eigen::MatrixXd(target.matrix()));
    CHECK(MaxAbs(fit.map.weights - expected) <= 1e-9);
    CHECK(fit.rank == 4);
    CHECK(fit.map.source_dim() == 4);
    CHECK(fit.map.target_dim() == 3);
  }
}

TEST_CASE("least squares is locally optimal") {
  Rng rng(4);
  auto source = RandomSet(40, 5, rng);
  EmbeddingSet target(source.vocab(), GaussianMatrix(40, 5, rng));
  auto dict = BuildDictionary(source, target);
  auto fit = FitLinear(source, target, dict, MapMode::kLeastSquares, Preprocess{});
  const RowMatrix x = PreprocessRows(source.matrix(), true, fit.map.source_mean);
  const RowMatrix z = PreprocessRows(target.matrix(), true, fit.map.target_mean);
  CHECK(fit.residual == doctest::Approx((x * fit.map.weights - z).squaredNorm()));
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd delta = GaussianMatrix(5, 5, rng, 1e-3);
    CHECK(fit.residual <= (x * (fit.map.weights + delta) - z).squaredNorm());
  }
}

TEST_CASE("orthogonal map preserves cosines of preprocessed vectors") {
  Rng rng(5);
  auto source = RandomSet(60, 8, rng);
  auto target = RandomSet(60, 8, rng);
  auto dict = BuildDictionary(source, target);
  auto fit = FitLinear(source, target, dict, MapMode::kOrthogonal, Preprocess{});
  CHECK(OrthogonalityDefect(fit.map.weights) <= 1e-8);
  const RowMatrix pre = PreprocessRows(source.matrix(), true, fit.map.source_mean);
  auto mapped = ApplyLinear(fit.map, source);
  for (int t = 0; t < 200; ++t) {
    const std::size_t i = rng.Below(60), j = rng.Below(60);
    std::span<const double> a(pre.data() + i * 8, 8), b(pre.data() + j * 8, 8);
    CHECK(std::fabs(Cosine(a, b) - Cosine(mapped.row(i), mapped.row(j))) <= 1e-10);
  }
}

TEST_CASE("unit normalization gives unit-norm operands and outputs") {
  Rng rng(6);
  auto inst = MakeRotation(30, 5, rng);
  auto dict = BuildDictionary(inst.source, inst.target);
  auto fit = FitLinear(inst.source, inst.target, dict, MapMode::kOrthogonal,
                       Preprocess{true, false});
  const RowMatrix pre = PreprocessRows(inst.source.matrix(), true, std::nullopt);
  auto mapped = ApplyLinear(fit.map, inst.source);
  for (Eigen::Index r = 0; r < pre.rows(); ++r) {
    CHECK(pre.row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mapped.matrix().row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("refitting with a permuted dictionary gives the same map") {
  Rng rng(7);
  auto source = RandomSet(80, 6, rng);
  auto target = RandomSet(80, 6, rng);
  auto dict = BuildDictionary(source, target);
  for (auto mode : {MapMode::kOrthogonal, MapMode::kLeastSquares}) {
    auto base = FitLinear(source, target, dict, mode, Preprocess{});
    auto shuffled = dict;
    rng.Shuffle(std::span<DictionaryPair>(shuffled.pairs));
    auto again = FitLinear(source, target, shuffled, mode, Preprocess{});
    CHECK(MaxAbs(base.map.weights - again.map.weights) <= 1e-10);
  }
}

TEST_CASE("identity map without preprocessing leaves the set unchanged") {
  Rng rng(8);
  auto set = RandomSet(10, 4, rng);
  LinearMap map;
  map.weights = Eigen::MatrixXd::Identity(4, 4);
  map.preprocess = kRaw;
  CHECK(ApplyLinear(map, set) == set);
}

TEST_CASE("apply maps the full vocabulary with the stored means") {
  Rng rng(9);
  auto source = RandomSet(100, 4, rng);
  auto target = RandomSet(100, 4, rng);
  std::vector<std::string> few(source.vocab().begin(), source.vocab().begin() + 10);
  auto dict = DictionaryFromWords(source, target, few);
  auto fit = FitLinear(source, target, dict, MapMode::kOrthogonal, Preprocess{});
  auto mapped = ApplyLinear(fit.map, source);
  CHECK(mapped.vocab() == source.vocab());

  // Means come from the ten pivots, not the full vocabulary.
  RowMatrix pivots(10, 4);
  for (int i = 0; i < 10; ++i) {
    pivots.row(i) = source.matrix().row(i) / source.matrix().row(i).norm();
  }
  CHECK(MaxAbs(*fit.map.source_mean - Eigen::VectorXd(pivots.colwise().mean().transpose())) <= 1e-15);
  const Eigen::RowVectorXd x = source.matrix().row(50) / source.matrix().row(50).norm();
  const Eigen::RowVectorXd expected =
      (x - fit.map.source_mean->transpose()) * fit.map.weights;
  CHECK(MaxAbs(mapped.matrix().row(50) - expected) <= 1e-14);
}

TEST_CASE("fit warnings and errors") {
  Rng rng(10);
  auto source = RandomSet(3, 5, rng);
  auto target = RandomSet(3, 5, rng);
  auto dict = BuildDictionary(source, target);
  auto ls = FitLinear(source, target, dict, MapMode::kLeastSquares, kRaw);
  CHECK(ls.warnings.size() == 2);
  CHECK(ls.rank == 3);
  CHECK(ls.map.weights.allFinite());
  auto orth = FitLinear(source, target, dict, MapMode::kOrthogonal, kRaw);
  CHECK(OrthogonalityDefect(orth.map.weights) <= 1e-8);
  CHECK_FALSE(orth.warnings.empty());

  auto wide = RandomSet(3, 4, rng);
  CHECK_THROWS_AS(FitLinear(source, wide, dict, MapMode::kOrthogonal, kRaw), UsageError);
  CHECK_NOTHROW(FitLinear(source, wide, dict, MapMode::kLeastSquares, kRaw));
  CHECK_THROWS_AS(ApplyLinear(orth.map, wide), UsageError);
  TrainingDictionary empty;
  CHECK_THROWS_AS(FitLinear(source, target, empty, MapMode::kOrthogonal, kRaw), UsageError);
}

TEST_CASE("rank-deficient pivots give the minimum-norm solution") {
  // The third source column duplicates the first.
  RowMatrix x(6, 3), z(6, 2);
  Rng rng(11);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = rng.Normal();
    x(i, 1) = rng.Normal();
    x(i, 2) = x(i, 0);
    z(i, 0) = rng.Normal();
    z(i, 1) = rng.Normal();
  }
  EmbeddingSet source(MakeWords(6), x), target(MakeWords(6), z);
  auto fit = FitLinear(source, target, BuildDictionary(source, target),
                       MapMode::kLeastSquares, kRaw);
  CHECK(fit.rank == 2);
  CHECK(fit.warnings.size() == 1);
  // Minimum norm splits the duplicated coefficient evenly.
  CHECK(MaxAbs(fit.map.weights.row(0) - fit.map.weights.row(2)) <= 1e-10);
  const Eigen::MatrixXd reduced = testing::NormalEquationSolve(
      Eigen::MatrixXd(x.leftCols(2)), Eigen::MatrixXd(z));
  CHECK(MaxAbs(fit.map.weights.row(0) * 2.0 - reduced.row(0)) <= 1e-9);
  CHECK(MaxAbs(fit.map.weights.row(1) - reduced.row(1)) <= 1e-9);
}

}  // namespace
}  // namespace embed_adapt
