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

#ifndef EMBED_ADAPT_EMBEDDING_SET_H_
#define EMBED_ADAPT_EMBEDDING_SET_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace embed_adapt {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// An ordered vocabulary with one dense vector per word.
//
// Invariants, checked on construction: words are unique and non-empty, the
// matrix has one row per word, dim() > 0, and every entry is finite. The set
// is immutable afterwards and may be shared read-only across threads.
class EmbeddingSet {
 public:
  EmbeddingSet(std::vector<std::string> vocab, RowMatrix matrix);

  // An empty set of the given dimension.
  static EmbeddingSet Empty(std::size_t dim);

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.cols()); }
  bool empty() const { return vocab_.empty(); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const RowMatrix& matrix() const { return matrix_; }
  const std::string& word(std::size_t row) const { return vocab_[row]; }

  std::span<const double> row(std::size_t i) const {
    return {matrix_.data() + i * dim(), dim()};
  }

  std::optional<std::size_t> Find(std::string_view word) const;
  bool Contains(std::string_view word) const { return Find(word).has_value(); }

  // Row index of `word`; throws UsageError naming the word when absent.
  std::size_t IndexOf(std::string_view word) const;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.vocab_ == b.vocab_ && a.matrix_.rows() == b.matrix_.rows() &&
           a.matrix_.cols() == b.matrix_.cols() && a.matrix_ == b.matrix_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> vocab_;
  RowMatrix matrix_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>
      index_;
};

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_EMBEDDING_SET_H_
