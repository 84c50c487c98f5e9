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

#ifndef EMBED_ADAPT_DICTIONARY_H_
#define EMBED_ADAPT_DICTIONARY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embed_adapt/embedding_set.h"

namespace embed_adapt {

struct DictionaryPair {
  std::string word;
  std::size_t src_row = 0;
  std::size_t tgt_row = 0;

  friend bool operator==(const DictionaryPair&, const DictionaryPair&) = default;
};

// Pivot pairs linking identical words in a source and a target set.
struct TrainingDictionary {
  std::vector<DictionaryPair> pairs;
  std::size_t source_dim = 0;
  std::size_t target_dim = 0;

  std::size_t size() const { return pairs.size(); }
  std::vector<std::string> Words() const;

  friend bool operator==(const TrainingDictionary&,
                         const TrainingDictionary&) = default;
};

// Corpus occurrence counts.
using FrequencyTable = std::unordered_map<std::string, std::uint64_t>;

// All words shared by both sets, in target vocabulary order. Throws
// DataError when the vocabularies are disjoint.
TrainingDictionary BuildDictionary(const EmbeddingSet& source,
                                   const EmbeddingSet& target);

// Dictionary restricted to `words` (in that order). Every word must be in
// both sets; the offending word is named otherwise.
TrainingDictionary DictionaryFromWords(const EmbeddingSet& source,
                                       const EmbeddingSet& target,
                                       std::span<const std::string> words);

// Keeps the min(n, size) pairs with the highest counts (absent words count
// 0, ties go to the lower target row). Kept pairs stay in dictionary order,
// so n >= size returns the dictionary unchanged.
TrainingDictionary TruncateByFrequency(const TrainingDictionary& dict,
                                       const FrequencyTable& freq,
                                       std::size_t n);

// Deterministic random partition into k folds whose sizes differ by at most
// one. Pairs keep their dictionary order inside each fold.
std::vector<std::vector<DictionaryPair>> SplitFolds(
    const TrainingDictionary& dict, std::size_t k, std::uint64_t seed);

// dict.tsv: one word per line.
std::vector<std::string> ReadWordList(const std::filesystem::path& path);
void WriteWordList(std::span<const std::string> words,
                   const std::filesystem::path& path);

// counts.tsv: "word<TAB>count" per line.
FrequencyTable ReadFrequencyTable(const std::filesystem::path& path);
void WriteFrequencyTable(const FrequencyTable& freq,
                         const std::filesystem::path& path);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_DICTIONARY_H_
