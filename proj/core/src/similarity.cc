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

#include "embed_adapt/similarity.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "embed_adapt/embedding_io.h"
#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

double Clamp(double c) { return std::clamp(c, -1.0, 1.0); }

// Runs fn(i) for i in [0, n) over up to `threads` workers. Each index is
// handled by exactly one worker, so writes to slot i are race-free.
template <typename Fn>
void ParallelFor(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

nlohmann::json NeighborsToJson(const NeighborList& list) {
  auto arr = nlohmann::json::array();
  for (const auto& n : list.neighbors) {
    arr.push_back({{"word", n.word}, {"cosine", n.cosine}});
  }
  return arr;
}

NeighborList NeighborsFromJson(const std::string& query,
                               const nlohmann::json& arr) {
  NeighborList list{query, {}};
  for (const auto& n : arr) {
    list.neighbors.push_back(
        {n.at("word").get<std::string>(), n.at("cosine").get<double>()});
  }
  return list;
}

}  // namespace

double Cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw UsageError("cosine of vectors with different dimensions (" +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw NumericalError("undefined cosine: zero vector");
  return Clamp(dot / (std::sqrt(uu) * std::sqrt(vv)));
}

std::vector<std::string> NeighborList::Words() const {
  std::vector<std::string> words;
  words.reserve(neighbors.size());
  for (const auto& n : neighbors) words.push_back(n.word);
  return words;
}

NeighborIndex::NeighborIndex(const EmbeddingSet& set)
    : set_(&set), normalized_(set.matrix()) {
  for (Eigen::Index r = 0; r < normalized_.rows(); ++r) {
    const double norm = normalized_.row(r).norm();
    if (norm == 0.0) {
      throw NumericalError("undefined cosine: zero vector for '" +
                           set.word(static_cast<std::size_t>(r)) + "'");
    }
    normalized_.row(r) /= norm;
  }
}

NeighborList NeighborIndex::TopK(std::string_view query, std::size_t k) const {
  return TopKForRow(set_->IndexOf(query), k);
}

NeighborList NeighborIndex::TopKForRow(std::size_t row, std::size_t k) const {
  const std::size_t n = set_->size();
  if (k == 0 || k >= n) {
    throw UsageError("k must be in [1, " + std::to_string(n - 1) +
                     "] for a vocabulary of " + std::to_string(n) +
                     " words, got " + std::to_string(k));
  }
  const Eigen::VectorXd scores =
      normalized_ * normalized_.row(static_cast<Eigen::Index>(row)).transpose();

  std::vector<std::size_t> candidates;
  candidates.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != row) candidates.push_back(i);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)];
    const double sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);

  NeighborList list{set_->word(row), {}};
  list.neighbors.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t c = candidates[i];
    list.neighbors.push_back(
        {set_->word(c), Clamp(scores[static_cast<Eigen::Index>(c)])});
  }
  return list;
}

NeighborList TopKNeighbors(const EmbeddingSet& set, std::string_view query,
                           std::size_t k) {
  return NeighborIndex(set).TopK(query, k);
}

bool NeighborSetsDiffer(const NeighborList& before, const NeighborList& after) {
  auto a = before.Words();
  auto b = after.Words();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a != b;
}

NeighborReport NeighborChangeReport(const EmbeddingSet& before,
                                    const EmbeddingSet& after,
                                    std::span<const std::string> vocab,
                                    std::size_t k, unsigned threads) {
  if (k == 0) throw UsageError("k must be positive");
  std::vector<std::size_t> rows;
  std::unordered_set<std::string_view> seen;
  for (const auto& w : vocab) {
    if (!seen.insert(w).second) continue;
    auto b = before.Find(w);
    if (!b) throw UsageError("word '" + w + "' missing from the before set");
    if (!after.Contains(w)) {
      throw UsageError("word '" + w + "' missing from the after set");
    }
    rows.push_back(*b);
  }
  if (rows.size() < k + 1) {
    throw UsageError("restricted vocabulary has " + std::to_string(rows.size()) +
                     " words; need at least k+1 = " + std::to_string(k + 1));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> canonical;
  canonical.reserve(rows.size());
  for (auto r : rows) canonical.push_back(before.word(r));

  const EmbeddingSet before_r = Subset(before, canonical).set;
  const EmbeddingSet after_r = Subset(after, canonical).set;
  const NeighborIndex before_index(before_r);
  const NeighborIndex after_index(after_r);

  NeighborReport report;
  report.k = k;
  report.vocab_size = canonical.size();
  report.per_word.resize(canonical.size());
  ParallelFor(canonical.size(), threads, [&](std::size_t i) {
    WordChange& entry = report.per_word[i];
    entry.word = canonical[i];
    entry.before = before_index.TopKForRow(i, k);
    entry.after = after_index.TopKForRow(i, k);
    entry.changed = NeighborSetsDiffer(entry.before, entry.after);
  });
  for (const auto& entry : report.per_word) {
    if (entry.changed) ++report.changed_count;
  }
  return report;
}

nlohmann::json ReportToJson(const NeighborReport& report) {
  nlohmann::json per_word = nlohmann::json::array();
  for (const auto& entry : report.per_word) {
    per_word.push_back({{"word", entry.word},
                        {"before", NeighborsToJson(entry.before)},
                        {"after", NeighborsToJson(entry.after)},
                        {"changed", entry.changed}});
  }
  return {{"k", report.k},
          {"vocab_size", report.vocab_size},
          {"changed_count", report.changed_count},
          {"per_word", std::move(per_word)}};
}

NeighborReport ReportFromJson(const nlohmann::json& json) {
  try {
    NeighborReport report;
    report.k = json.at("k").get<std::size_t>();
    report.vocab_size = json.at("vocab_size").get<std::size_t>();
    report.changed_count = json.at("changed_count").get<std::size_t>();
    for (const auto& e : json.at("per_word")) {
      const auto word = e.at("word").get<std::string>();
      report.per_word.push_back({word, NeighborsFromJson(word, e.at("before")),
                                 NeighborsFromJson(word, e.at("after")),
                                 e.at("changed").get<bool>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed neighbor report: ") + e.what());
  }
}

void WriteReportCsv(const NeighborReport& report, std::ostream& out) {
  out << "word,changed,rank,before_word,before_cosine,after_word,after_cosine\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  for (const auto& e : report.per_word) {
    for (std::size_t r = 0; r < report.k; ++r) {
      const auto& b = e.before.neighbors.at(r);
      const auto& a = e.after.neighbors.at(r);
      out << quote(e.word) << ',' << (e.changed ? 1 : 0) << ',' << r + 1 << ','
          << quote(b.word) << ',' << b.cosine << ',' << quote(a.word) << ','
          << a.cosine << '\n';
    }
  }
}

std::vector<NeighborTableRow> NeighborTable(std::span<const NamedSet> sets,
                                            std::span<const std::string> queries,
                                            std::size_t k) {
  std::vector<NeighborIndex> indexes;
  indexes.reserve(sets.size());
  for (const auto& s : sets) indexes.emplace_back(s.set.get());

  std::vector<NeighborTableRow> rows;
  for (const auto& q : queries) {
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const EmbeddingSet& set = sets[i].set.get();
      NeighborTableRow row{q, sets[i].name, std::nullopt};
      auto idx = set.Find(q);
      if (idx && set.size() > 1) {
        const std::size_t kk = std::min(k, set.size() - 1);
        row.neighbors = indexes[i].TopKForRow(*idx, kk).neighbors;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void WriteNeighborTable(std::span<const NeighborTableRow> rows,
                        std::ostream& out) {
  for (const auto& row : rows) {
    out << row.query << '\t' << row.set_name;
    if (!row.neighbors) {
      out << "\t<absent>";
    } else {
      for (const auto& n : *row.neighbors) out << '\t' << n.word;
    }
    out << '\n';
  }
}

double MeanPairwiseCosine(const EmbeddingSet& set) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.dim()));
  std::size_t n = 0;
  for (Eigen::Index r = 0; r < set.matrix().rows(); ++r) {
    const double norm = set.matrix().row(r).norm();
    if (norm == 0.0) continue;
    sum += set.matrix().row(r).transpose() / norm;
    ++n;
  }
  if (n < 2) throw UsageError("mean pairwise cosine needs two nonzero vectors");
  const double nd = static_cast<double>(n);
  return (sum.squaredNorm() - nd) / (nd * (nd - 1.0));
}

}  // namespace embed_adapt
