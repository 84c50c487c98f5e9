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

#include "embed_adapt/dictionary.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

#include "embed_adapt/error.h"
#include "embed_adapt/random.h"

namespace embed_adapt {

std::vector<std::string> TrainingDictionary::Words() const {
  std::vector<std::string> words;
  words.reserve(pairs.size());
  for (const auto& p : pairs) words.push_back(p.word);
  return words;
}

TrainingDictionary BuildDictionary(const EmbeddingSet& source,
                                   const EmbeddingSet& target) {
  TrainingDictionary dict{{}, source.dim(), target.dim()};
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (auto s = source.Find(target.word(t))) {
      dict.pairs.push_back({target.word(t), *s, t});
    }
  }
  if (dict.pairs.empty()) {
    throw DataError("source and target vocabularies share no words");
  }
  return dict;
}

TrainingDictionary DictionaryFromWords(const EmbeddingSet& source,
                                       const EmbeddingSet& target,
                                       std::span<const std::string> words) {
  TrainingDictionary dict{{}, source.dim(), target.dim()};
  for (const auto& w : words) {
    auto s = source.Find(w);
    auto t = target.Find(w);
    if (!s || !t) {
      throw DataError("dictionary word '" + w + "' is missing from the " +
                      (!s ? "source" : "target") + " set");
    }
    dict.pairs.push_back({w, *s, *t});
  }
  if (dict.pairs.empty()) throw DataError("dictionary is empty");
  return dict;
}

TrainingDictionary TruncateByFrequency(const TrainingDictionary& dict,
                                       const FrequencyTable& freq,
                                       std::size_t n) {
  if (n == 0) throw UsageError("truncation size must be positive");
  if (n >= dict.size()) return dict;

  auto count = [&](const DictionaryPair& p) -> std::uint64_t {
    auto it = freq.find(p.word);
    return it == freq.end() ? 0 : it->second;
  };
  std::vector<std::size_t> order(dict.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = count(dict.pairs[a]);
    const auto cb = count(dict.pairs[b]);
    if (ca != cb) return ca > cb;
    return dict.pairs[a].tgt_row < dict.pairs[b].tgt_row;
  });
  order.resize(n);
  std::sort(order.begin(), order.end());

  TrainingDictionary out{{}, dict.source_dim, dict.target_dim};
  out.pairs.reserve(n);
  for (auto i : order) out.pairs.push_back(dict.pairs[i]);
  return out;
}

std::vector<std::vector<DictionaryPair>> SplitFolds(
    const TrainingDictionary& dict, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw UsageError("fold count must be positive");
  if (k > dict.size()) {
    throw UsageError("cannot split " + std::to_string(dict.size()) +
                     " pairs into " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(dict.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));

  const std::size_t base = dict.size() / k;
  const std::size_t extra = dict.size() % k;
  std::vector<std::vector<DictionaryPair>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                     order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(members.begin(), members.end());
    for (auto i : members) folds[f].push_back(dict.pairs[i]);
    pos += len;
  }
  return folds;
}

std::vector<std::string> ReadWordList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    words.push_back(line.substr(first, last - first + 1));
  }
  return words;
}

void WriteWordList(std::span<const std::string> words,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (const auto& w : words) out << w << '\n';
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

FrequencyTable ReadFrequencyTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  FrequencyTable freq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 'word<TAB>count'");
    }
    std::uint64_t count = 0;
    const char* begin = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(begin, end, count);
    if (ec != std::errc() || ptr != end) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": count is not a nonnegative integer");
    }
    freq[line.substr(0, tab)] += count;
  }
  return freq;
}

void WriteFrequencyTable(const FrequencyTable& freq,
                         const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::uint64_t>> entries(freq.begin(),
                                                             freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (const auto& [word, count] : entries) out << word << '\t' << count << '\n';
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace embed_adapt
