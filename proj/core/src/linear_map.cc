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

#include "embed_adapt/linear_map.h"

#include <cmath>

#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

RowMatrix GatherRows(const EmbeddingSet& set,
                     const std::vector<DictionaryPair>& pairs, bool source) {
  RowMatrix out(static_cast<Eigen::Index>(pairs.size()),
                static_cast<Eigen::Index>(set.dim()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t row = source ? pairs[i].src_row : pairs[i].tgt_row;
    if (row >= set.size() || set.word(row) != pairs[i].word) {
      throw UsageError("dictionary entry '" + pairs[i].word +
                       "' does not match the " +
                       (source ? "source" : "target") + " set");
    }
    out.row(static_cast<Eigen::Index>(i)) =
        set.matrix().row(static_cast<Eigen::Index>(row));
  }
  return out;
}

void NormalizeRows(RowMatrix& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm > 0.0) rows.row(r) /= norm;
  }
}

}  // namespace

MapMode ParseMapMode(std::string_view name) {
  if (name == "ls" || name == "least_squares") return MapMode::kLeastSquares;
  if (name == "orthogonal") return MapMode::kOrthogonal;
  throw UsageError("unknown mapping mode '" + std::string(name) +
                   "' (expected ls or orthogonal)");
}

std::string_view MapModeName(MapMode mode) {
  return mode == MapMode::kLeastSquares ? "ls" : "orthogonal";
}

RowMatrix PreprocessRows(const RowMatrix& rows, bool unit_normalize,
                         const std::optional<Eigen::VectorXd>& mean) {
  RowMatrix out = rows;
  if (unit_normalize) NormalizeRows(out);
  if (mean) out.rowwise() -= mean->transpose();
  return out;
}

LinearFit FitLinear(const EmbeddingSet& source, const EmbeddingSet& target,
                    const TrainingDictionary& dict, MapMode mode,
                    Preprocess preprocess) {
  if (dict.pairs.empty()) throw UsageError("training dictionary is empty");
  if (mode == MapMode::kOrthogonal && source.dim() != target.dim()) {
    throw UsageError("orthogonal mapping needs equal dimensions, got " +
                     std::to_string(source.dim()) + " and " +
                     std::to_string(target.dim()));
  }

  LinearFit fit;
  RowMatrix x = GatherRows(source, dict.pairs, true);
  RowMatrix z = GatherRows(target, dict.pairs, false);
  if (preprocess.unit_normalize) {
    NormalizeRows(x);
    NormalizeRows(z);
  }
  if (preprocess.mean_center) {
    fit.map.source_mean = x.colwise().mean().transpose();
    fit.map.target_mean = z.colwise().mean().transpose();
    x.rowwise() -= fit.map.source_mean->transpose();
    z.rowwise() -= fit.map.target_mean->transpose();
  }
  if (dict.size() < source.dim()) {
    fit.warnings.push_back("only " + std::to_string(dict.size()) +
                           " pivots for dimension " +
                           std::to_string(source.dim()) +
                           "; the map is underdetermined");
  }

  fit.map.preprocess = preprocess;
  fit.map.mode = mode;
  if (mode == MapMode::kLeastSquares) {
    const Eigen::MatrixXd xd = x;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xd);
    fit.rank = cod.rank();
    fit.map.weights = cod.solve(Eigen::MatrixXd(z));
    if (fit.rank < xd.cols()) {
      fit.warnings.push_back("pivot matrix has rank " +
                             std::to_string(fit.rank) + " < " +
                             std::to_string(xd.cols()) +
                             "; returned the minimum-norm solution");
    }
  } else {
    const Eigen::MatrixXd cross = x.transpose() * z;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    fit.rank = svd.rank();
    fit.map.weights = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd gram =
        fit.map.weights.transpose() * fit.map.weights -
        Eigen::MatrixXd::Identity(fit.map.weights.cols(), fit.map.weights.cols());
    if (!fit.map.weights.allFinite() || gram.cwiseAbs().maxCoeff() > 1e-8) {
      throw NumericalError("SVD of the cross-covariance did not converge");
    }
  }
  if (!fit.map.weights.allFinite()) {
    throw NumericalError("linear map has non-finite entries");
  }
  fit.residual = (x * fit.map.weights - z).squaredNorm();
  return fit;
}

EmbeddingSet ApplyLinear(const LinearMap& map, const EmbeddingSet& source) {
  if (source.dim() != map.source_dim()) {
    throw UsageError("dimension mismatch: map expects " +
                     std::to_string(map.source_dim()) + "-d input, set is " +
                     std::to_string(source.dim()) + "-d");
  }
  const RowMatrix pre = PreprocessRows(source.matrix(),
                                       map.preprocess.unit_normalize,
                                       map.source_mean);
  RowMatrix mapped = pre * map.weights;
  return EmbeddingSet(source.vocab(), std::move(mapped));
}

}  // namespace embed_adapt
