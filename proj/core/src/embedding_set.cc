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

#include "embed_adapt/embedding_set.h"

#include <cmath>

#include "embed_adapt/error.h"

namespace embed_adapt {

EmbeddingSet::EmbeddingSet(std::vector<std::string> vocab, RowMatrix matrix)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (matrix_.cols() <= 0) {
    throw DataError("embedding dimension must be positive");
  }
  if (static_cast<std::size_t>(matrix_.rows()) != vocab_.size()) {
    throw DataError("vocabulary has " + std::to_string(vocab_.size()) +
                    " words but matrix has " +
                    std::to_string(matrix_.rows()) + " rows");
  }
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (vocab_[i].empty()) {
      throw DataError("empty word at row " + std::to_string(i));
    }
    if (!index_.emplace(vocab_[i], i).second) {
      throw DataError("duplicate word '" + vocab_[i] + "'");
    }
  }
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix_.cols(); ++c) {
      if (!std::isfinite(matrix_(r, c))) {
        throw DataError("non-finite value in vector of '" +
                        vocab_[static_cast<std::size_t>(r)] + "'");
      }
    }
  }
}

EmbeddingSet EmbeddingSet::Empty(std::size_t dim) {
  return EmbeddingSet({}, RowMatrix(0, static_cast<Eigen::Index>(dim)));
}

std::optional<std::size_t> EmbeddingSet::Find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingSet::IndexOf(std::string_view word) const {
  auto found = Find(word);
  if (!found) {
    throw UsageError("word '" + std::string(word) + "' not in vocabulary");
  }
  return *found;
}

}  // namespace embed_adapt
