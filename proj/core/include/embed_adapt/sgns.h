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

#ifndef EMBED_ADAPT_SGNS_H_
#define EMBED_ADAPT_SGNS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embed_adapt/dictionary.h"
#include "embed_adapt/embedding_set.h"
#include "embed_adapt/random.h"

namespace embed_adapt {

// Whitespace-tokenized text; one sentence per line, contexts never cross
// line boundaries.
struct Corpus {
  std::vector<std::vector<std::string>> sentences;

  std::size_t TokenCount() const;

  static Corpus FromStream(std::istream& in, bool lowercase = false);
  // A file, or every regular file of a directory in path order.
  static Corpus Load(const std::filesystem::path& path, bool lowercase = false);
};

// Words sorted by count descending, ties by first occurrence.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;

  std::size_t size() const { return words.size(); }
  std::optional<std::size_t> Find(std::string_view word) const;
  FrequencyTable Frequencies() const;

  std::unordered_map<std::string, std::size_t> index;
};

// Words occurring at least min_count times, with exact counts. Throws
// DataError when the corpus is empty or nothing survives the filter.
Vocabulary BuildVocab(const Corpus& corpus, std::uint64_t min_count);

struct SgnsConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double initial_lr = 0.025;
  std::uint64_t min_count = 5;
  std::size_t epochs = 5;
  double subsample = 1e-3;  // 0 disables subsampling
  std::uint64_t seed = 1;
  unsigned threads = 1;     // 1 is the deterministic mode
  bool preinit_context = false;

  // Settings for very small corpora: lr 0.05, min_count 2, 25 epochs.
  static SgnsConfig TinyCorpus();
  void Validate() const;
};

// Initial learning rate used when retraining from preinitialized vectors.
inline constexpr double kPreinitLearningRate = 0.1;

// Adds lambda * phi(w) * |v_w - v_w^pre|^2 to the loss of every update of a
// preinitialized word's input vector.
struct RegularizationConfig {
  double lambda = 0.0;
  std::unordered_map<std::string, double> phi;

  void Validate() const;
};

// phi(w) = count(w) / max count; words absent from the table get 0.
std::unordered_map<std::string, double> SignificancePhi(const FrequencyTable& freq);

// Negative-sampling distribution proportional to count^0.75, realized as a
// lookup table of word ids.
class NoiseTable {
 public:
  explicit NoiseTable(std::span<const std::uint64_t> counts,
                      double power = 0.75, std::size_t table_size = 0);

  std::uint32_t Sample(Rng& rng) const {
    return table_[static_cast<std::size_t>(rng.Below(table_.size()))];
  }
  // Exact target probability of word i.
  double Probability(std::size_t i) const { return probabilities_[i]; }
  std::size_t table_size() const { return table_.size(); }

 private:
  std::vector<std::uint32_t> table_;
  std::vector<double> probabilities_;
};

struct SgnsPairGradient {
  Eigen::VectorXd center;
  Eigen::VectorXd context;
  RowMatrix negatives;  // one row per negative sample
};

// Loss of one (center, context) update:
//   -log s(u_ctx . v) - sum_j log s(-u_j . v) + reg_weight |v - v_pre|^2
// where v is the center input vector, u are output vectors and s is the
// logistic function. An empty `preinit` drops the last term. Fills
// `gradient` (resized as needed) when non-null.
double SgnsPairLoss(std::span<const double> center,
                    std::span<const double> context,
                    std::span<const std::span<const double>> negatives,
                    std::span<const double> preinit, double reg_weight,
                    SgnsPairGradient* gradient);

struct SgnsModel {
  Vocabulary vocab;
  RowMatrix input;   // published word vectors
  RowMatrix output;  // context vectors
  std::size_t preinit_overlap = 0;
  double final_lr = 0.0;
};

// Skip-gram with negative sampling. With `preinit`, input vectors of words
// shared with it start from its values; with `reg` (requires preinit) their
// updates are pulled toward those values. The learning rate decays linearly
// with the fraction of corpus positions processed, floored at 1e-4 of the
// initial value.
SgnsModel TrainSgns(const Corpus& corpus, const SgnsConfig& config,
                    const EmbeddingSet* preinit = nullptr,
                    const RegularizationConfig* reg = nullptr);

EmbeddingSet Export(const SgnsModel& model);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_SGNS_H_
