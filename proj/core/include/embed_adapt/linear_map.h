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

#ifndef EMBED_ADAPT_LINEAR_MAP_H_
#define EMBED_ADAPT_LINEAR_MAP_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "embed_adapt/dictionary.h"
#include "embed_adapt/embedding_set.h"

namespace embed_adapt {

enum class MapMode { kLeastSquares, kOrthogonal };

MapMode ParseMapMode(std::string_view name);  // "ls" | "orthogonal"
std::string_view MapModeName(MapMode mode);

// Applied to both sides before fitting, and to the source side on apply:
// length normalization first, then subtraction of the dictionary mean.
struct Preprocess {
  bool unit_normalize = true;
  bool mean_center = true;

  friend bool operator==(const Preprocess&, const Preprocess&) = default;
};

// Row-vector convention: a preprocessed source row x maps to x * weights.
struct LinearMap {
  Eigen::MatrixXd weights;  // d_src x d_tgt
  Preprocess preprocess;
  MapMode mode = MapMode::kOrthogonal;
  std::optional<Eigen::VectorXd> source_mean;  // set iff mean_center
  std::optional<Eigen::VectorXd> target_mean;

  std::size_t source_dim() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t target_dim() const { return static_cast<std::size_t>(weights.cols()); }
};

struct LinearFit {
  LinearMap map;
  Eigen::Index rank = 0;             // numerical rank of the source pivots
  double residual = 0.0;             // sum of squared errors on the pivots
  std::vector<std::string> warnings;
};

// Least squares minimizes sum_i |x_i W - z_i|^2 over the dictionary rows and
// returns the minimum-norm solution when the pivots are rank deficient.
// Orthogonal mode solves the Procrustes problem: W = U V^T where
// X^T Z = U S V^T. Orthogonal mode needs d_src == d_tgt.
LinearFit FitLinear(const EmbeddingSet& source, const EmbeddingSet& target,
                    const TrainingDictionary& dict, MapMode mode,
                    Preprocess preprocess);

// Maps every source word (the full vocabulary, not only pivots) using the
// means stored at fit time.
EmbeddingSet ApplyLinear(const LinearMap& map, const EmbeddingSet& source);

// Copy of `rows` with the given preprocessing applied; `mean` is subtracted
// when present. Zero rows are left at zero by normalization.
RowMatrix PreprocessRows(const RowMatrix& rows, bool unit_normalize,
                         const std::optional<Eigen::VectorXd>& mean);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_LINEAR_MAP_H_
