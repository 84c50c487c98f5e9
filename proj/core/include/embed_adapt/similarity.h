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

#ifndef EMBED_ADAPT_SIMILARITY_H_
#define EMBED_ADAPT_SIMILARITY_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embed_adapt/embedding_set.h"

namespace embed_adapt {

// u.v / (|u||v|), clamped to [-1, 1]. Throws NumericalError ("undefined
// cosine") when either vector is zero and UsageError on length mismatch.
double Cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
  std::string word;
  double cosine = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Neighbors are sorted by cosine descending, ties by vocabulary index
// ascending; the query itself never appears.
struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;

  std::vector<std::string> Words() const;
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

// Exact brute-force cosine search over the rows of one embedding set.
// Rows are normalized once on construction; a zero row is rejected there
// because its cosine with anything is undefined. The set must outlive the
// index.
class NeighborIndex {
 public:
  explicit NeighborIndex(const EmbeddingSet& set);

  std::size_t size() const { return set_->size(); }

  // Requires k < size(). Throws UsageError for unknown words or bad k.
  NeighborList TopK(std::string_view query, std::size_t k) const;
  NeighborList TopKForRow(std::size_t row, std::size_t k) const;

 private:
  const EmbeddingSet* set_;
  RowMatrix normalized_;
};

NeighborList TopKNeighbors(const EmbeddingSet& set, std::string_view query,
                           std::size_t k);

struct WordChange {
  std::string word;
  NeighborList before;
  NeighborList after;
  bool changed = false;
};

struct NeighborReport {
  std::size_t k = 1;
  std::size_t vocab_size = 0;
  std::size_t changed_count = 0;
  std::vector<WordChange> per_word;
};

// True when the two lists hold different sets of neighbor words.
bool NeighborSetsDiffer(const NeighborList& before, const NeighborList& after);

// Top-k neighbors of each word in `vocab`, searched only among `vocab`, in
// both spaces. The restricted vocabulary is put into the row order of
// `before` first, so ties break the same way whatever order `vocab` arrives
// in and the report does not depend on that order. Repeated words are
// ignored. Throws UsageError if a word is missing from either set or fewer
// than k+1 distinct words remain.
NeighborReport NeighborChangeReport(const EmbeddingSet& before,
                                    const EmbeddingSet& after,
                                    std::span<const std::string> vocab,
                                    std::size_t k, unsigned threads = 1);

// Schema: {k, vocab_size, changed_count,
//          per_word: [{word, before: [{word, cosine}], after: [...], changed}]}
nlohmann::json ReportToJson(const NeighborReport& report);
NeighborReport ReportFromJson(const nlohmann::json& json);

// One line per (word, rank):
//   word,changed,rank,before_word,before_cosine,after_word,after_cosine
void WriteReportCsv(const NeighborReport& report, std::ostream& out);

struct NamedSet {
  std::string name;
  std::reference_wrapper<const EmbeddingSet> set;
};

struct NeighborTableRow {
  std::string query;
  std::string set_name;
  std::optional<std::vector<Neighbor>> neighbors;  // nullopt: query absent
};

// One row per (query, set), queries outer. k is clamped to size-1 per set.
std::vector<NeighborTableRow> NeighborTable(std::span<const NamedSet> sets,
                                            std::span<const std::string> queries,
                                            std::size_t k);

// Tab-separated: query, set, then the neighbor words (or "<absent>").
void WriteNeighborTable(std::span<const NeighborTableRow> rows,
                        std::ostream& out);

// Mean cosine over all unordered pairs of nonzero rows, computed exactly as
// (|sum u|^2 - n) / (n (n - 1)) over the normalized rows u.
double MeanPairwiseCosine(const EmbeddingSet& set);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_SIMILARITY_H_
