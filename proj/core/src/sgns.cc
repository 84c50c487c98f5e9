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

#include "embed_adapt/sgns.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::span<double> Row(RowMatrix& m, std::size_t r) {
  return {m.data() + r * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

std::span<const double> Row(const RowMatrix& m, std::size_t r) {
  return {m.data() + r * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

struct TrainingData {
  std::vector<std::vector<std::uint32_t>> sentences;
  std::uint64_t total_words = 0;
  std::vector<double> keep_probability;
  std::vector<double> reg_weight;  // lambda * phi(w); 0 when unregularized
  std::vector<char> has_preinit;
  RowMatrix preinit;               // valid rows where has_preinit
};

struct Worker {
  const SgnsConfig& config;
  const TrainingData& data;
  const NoiseTable& noise;
  SgnsModel& model;
  std::atomic<std::uint64_t>& processed;
  std::uint64_t total_positions;

  void Run(std::size_t begin, std::size_t end, Rng& rng, double& last_lr) {
    SgnsPairGradient grad;
    std::vector<std::span<const double>> negs;
    std::vector<std::uint32_t> neg_ids;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;  // (id, position)
    const double min_lr = config.initial_lr * 1e-4;

    for (std::size_t s = begin; s < end; ++s) {
      const auto& sentence = data.sentences[s];
      kept.clear();
      for (std::uint32_t pos = 0; pos < sentence.size(); ++pos) {
        const std::uint32_t id = sentence[pos];
        if (data.keep_probability[id] < 1.0 &&
            rng.Uniform() >= data.keep_probability[id]) {
          continue;
        }
        kept.emplace_back(id, pos);
      }
      const std::uint64_t base = processed.fetch_add(sentence.size());

      for (std::size_t i = 0; i < kept.size(); ++i) {
        const double progress =
            static_cast<double>(base + kept[i].second) /
            static_cast<double>(total_positions + 1);
        const double lr = std::max(min_lr, config.initial_lr * (1.0 - progress));
        last_lr = lr;
        const std::uint32_t center = kept[i].first;
        const std::size_t b = 1 + static_cast<std::size_t>(rng.Below(config.window));
        const std::size_t lo = i >= b ? i - b : 0;
        const std::size_t hi = std::min(kept.size() - 1, i + b);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const std::uint32_t context = kept[j].first;
          neg_ids.clear();
          for (std::size_t n = 0; n < config.negatives; ++n) {
            const std::uint32_t neg = noise.Sample(rng);
            if (neg != context) neg_ids.push_back(neg);
          }
          Step(center, context, neg_ids, negs, grad, lr);
        }
      }
    }
  }

  void Step(std::uint32_t center, std::uint32_t context,
            const std::vector<std::uint32_t>& neg_ids,
            std::vector<std::span<const double>>& negs, SgnsPairGradient& grad,
            double lr) {
    negs.clear();
    for (auto n : neg_ids) negs.push_back(Row(std::as_const(model.output), n));
    const bool regularized = data.reg_weight[center] > 0.0;
    const std::span<const double> pre =
        regularized ? Row(data.preinit, center) : std::span<const double>();
    const double loss =
        SgnsPairLoss(Row(std::as_const(model.input), center),
                     Row(std::as_const(model.output), context), negs, pre,
                     data.reg_weight[center], &grad);
    if (!std::isfinite(loss)) {
      throw NumericalError("SGNS training diverged (non-finite loss) at word '" +
                           model.vocab.words[center] + "'");
    }
    auto v = Row(model.input, center);
    auto u = Row(model.output, context);
    for (std::size_t d = 0; d < v.size(); ++d) {
      v[d] -= lr * grad.center[static_cast<Eigen::Index>(d)];
      u[d] -= lr * grad.context[static_cast<Eigen::Index>(d)];
    }
    for (std::size_t n = 0; n < neg_ids.size(); ++n) {
      auto un = Row(model.output, neg_ids[n]);
      for (std::size_t d = 0; d < un.size(); ++d) {
        un[d] -= lr * grad.negatives(static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(d));
      }
    }
  }
};

}  // namespace

std::size_t Corpus::TokenCount() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

Corpus Corpus::FromStream(std::istream& in, bool lowercase) {
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tokens(line);
    std::vector<std::string> sentence;
    std::string tok;
    while (tokens >> tok) {
      if (lowercase) {
        for (auto& c : tok) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
      }
      sentence.push_back(std::move(tok));
    }
    if (!sentence.empty()) corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus Corpus::Load(const std::filesystem::path& path, bool lowercase) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  Corpus corpus;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("cannot open corpus file '" + f.string() + "'");
    Corpus part = FromStream(in, lowercase);
    for (auto& s : part.sentences) corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

std::optional<std::size_t> Vocabulary::Find(std::string_view word) const {
  auto it = index.find(std::string(word));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

FrequencyTable Vocabulary::Frequencies() const {
  FrequencyTable freq;
  for (std::size_t i = 0; i < words.size(); ++i) freq[words[i]] = counts[i];
  return freq;
}

Vocabulary BuildVocab(const Corpus& corpus, std::uint64_t min_count) {
  if (corpus.TokenCount() == 0) throw DataError("corpus is empty");
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& tok : sentence) {
      auto [it, inserted] = first_seen.emplace(tok, entries.size());
      if (inserted) entries.emplace_back(tok, 0);
      ++entries[it->second].second;
    }
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].second >= min_count) order.push_back(i);
  }
  if (order.empty()) {
    throw DataError("no word occurs at least " + std::to_string(min_count) +
                    " times");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].second > entries[b].second;
  });
  Vocabulary vocab;
  for (auto i : order) {
    vocab.index.emplace(entries[i].first, vocab.words.size());
    vocab.words.push_back(entries[i].first);
    vocab.counts.push_back(entries[i].second);
  }
  return vocab;
}

SgnsConfig SgnsConfig::TinyCorpus() {
  SgnsConfig c;
  c.initial_lr = 0.05;
  c.min_count = 2;
  c.epochs = 25;
  return c;
}

void SgnsConfig::Validate() const {
  if (dim == 0) throw UsageError("dim must be positive");
  if (window == 0) throw UsageError("window must be positive");
  if (negatives == 0) throw UsageError("negatives must be positive");
  if (!(initial_lr > 0.0)) throw UsageError("learning rate must be positive");
  if (min_count == 0) throw UsageError("min_count must be positive");
  if (subsample < 0.0) throw UsageError("subsample threshold must be nonnegative");
  if (threads == 0) throw UsageError("threads must be positive");
}

void RegularizationConfig::Validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("regularization lambda must be finite and nonnegative");
  }
  for (const auto& [word, value] : phi) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw UsageError("significance of '" + word + "' is outside [0, 1]");
    }
  }
}

std::unordered_map<std::string, double> SignificancePhi(const FrequencyTable& freq) {
  std::uint64_t max_count = 0;
  for (const auto& [word, count] : freq) max_count = std::max(max_count, count);
  std::unordered_map<std::string, double> phi;
  for (const auto& [word, count] : freq) {
    phi[word] = max_count == 0 ? 0.0
                               : static_cast<double>(count) /
                                     static_cast<double>(max_count);
  }
  return phi;
}

NoiseTable::NoiseTable(std::span<const std::uint64_t> counts, double power,
                       std::size_t table_size) {
  if (counts.empty()) throw UsageError("noise table needs a nonempty vocabulary");
  if (table_size == 0) {
    table_size = std::clamp<std::size_t>(100 * counts.size(), 1'000'000,
                                         100'000'000);
  }
  double total = 0.0;
  probabilities_.reserve(counts.size());
  for (auto c : counts) {
    probabilities_.push_back(std::pow(static_cast<double>(c), power));
    total += probabilities_.back();
  }
  if (!(total > 0.0)) throw UsageError("noise table needs a positive count");
  for (auto& p : probabilities_) p /= total;

  table_.resize(table_size);
  std::size_t word = 0;
  double cumulative = probabilities_[0];
  for (std::size_t a = 0; a < table_size; ++a) {
    table_[a] = static_cast<std::uint32_t>(word);
    if ((static_cast<double>(a) + 0.5) / static_cast<double>(table_size) >
            cumulative &&
        word + 1 < probabilities_.size()) {
      ++word;
      cumulative += probabilities_[word];
    }
  }
}

double SgnsPairLoss(std::span<const double> center,
                    std::span<const double> context,
                    std::span<const std::span<const double>> negatives,
                    std::span<const double> preinit, double reg_weight,
                    SgnsPairGradient* gradient) {
  const std::size_t d = center.size();
  if (context.size() != d || (!preinit.empty() && preinit.size() != d)) {
    throw UsageError("SGNS vectors have mismatched dimensions");
  }
  const auto dd = static_cast<Eigen::Index>(d);
  if (gradient) {
    gradient->center.setZero(dd);
    gradient->context.resize(dd);
    gradient->negatives.resize(static_cast<Eigen::Index>(negatives.size()), dd);
  }

  const double pos = Dot(context, center);
  double loss = Softplus(-pos);
  if (gradient) {
    const double g = Sigmoid(pos) - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      gradient->center[ii] += g * context[i];
      gradient->context[ii] = g * center[i];
    }
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const auto& u = negatives[n];
    if (u.size() != d) throw UsageError("SGNS vectors have mismatched dimensions");
    const double s = Dot(u, center);
    loss += Softplus(s);
    if (gradient) {
      const double g = Sigmoid(s);
      for (std::size_t i = 0; i < d; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        gradient->center[ii] += g * u[i];
        gradient->negatives(static_cast<Eigen::Index>(n), ii) = g * center[i];
      }
    }
  }
  if (!preinit.empty() && reg_weight != 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = center[i] - preinit[i];
      sq += diff * diff;
      if (gradient) {
        gradient->center[static_cast<Eigen::Index>(i)] += 2.0 * reg_weight * diff;
      }
    }
    loss += reg_weight * sq;
  }
  return loss;
}

SgnsModel TrainSgns(const Corpus& corpus, const SgnsConfig& config,
                    const EmbeddingSet* preinit,
                    const RegularizationConfig* reg) {
  config.Validate();
  if (preinit && preinit->dim() != config.dim) {
    throw UsageError("dimension mismatch: preinit vectors are " +
                     std::to_string(preinit->dim()) + "-d, config.dim is " +
                     std::to_string(config.dim));
  }
  if (reg) {
    reg->Validate();
    if (!preinit) throw UsageError("regularization requires preinit vectors");
  }

  SgnsModel model;
  model.vocab = BuildVocab(corpus, config.min_count);
  const std::size_t v = model.vocab.size();
  const auto rows = static_cast<Eigen::Index>(v);
  const auto cols = static_cast<Eigen::Index>(config.dim);

  Rng init_rng(DeriveSeed(config.seed, 0));
  model.input.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      model.input(r, c) = (init_rng.Uniform() - 0.5) / static_cast<double>(config.dim);
    }
  }
  model.output = RowMatrix::Zero(rows, cols);

  TrainingData data;
  data.reg_weight.assign(v, 0.0);
  data.has_preinit.assign(v, 0);
  if (preinit) {
    data.preinit = RowMatrix::Zero(rows, cols);
    for (std::size_t w = 0; w < v; ++w) {
      auto p = preinit->Find(model.vocab.words[w]);
      if (!p) continue;
      const auto src = preinit->matrix().row(static_cast<Eigen::Index>(*p));
      const auto wr = static_cast<Eigen::Index>(w);
      model.input.row(wr) = src;
      if (config.preinit_context) model.output.row(wr) = src;
      data.preinit.row(wr) = src;
      data.has_preinit[w] = 1;
      ++model.preinit_overlap;
      if (reg) {
        auto it = reg->phi.find(model.vocab.words[w]);
        const double phi = it == reg->phi.end() ? 0.0 : it->second;
        data.reg_weight[w] = reg->lambda * phi;
      }
    }
  }

  for (const auto& sentence : corpus.sentences) {
    std::vector<std::uint32_t> ids;
    for (const auto& tok : sentence) {
      if (auto id = model.vocab.Find(tok)) ids.push_back(static_cast<std::uint32_t>(*id));
    }
    data.total_words += ids.size();
    if (ids.size() > 1) data.sentences.push_back(std::move(ids));
  }
  data.keep_probability.assign(v, 1.0);
  if (config.subsample > 0.0) {
    const double threshold = config.subsample * static_cast<double>(data.total_words);
    for (std::size_t w = 0; w < v; ++w) {
      const double f = static_cast<double>(model.vocab.counts[w]);
      data.keep_probability[w] =
          std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
    }
  }

  const NoiseTable noise(model.vocab.counts);
  std::atomic<std::uint64_t> processed{0};
  std::uint64_t positions = 0;
  for (const auto& s : data.sentences) positions += s.size();
  const std::uint64_t total_positions = positions * config.epochs;
  Worker worker{config, data, noise, model, processed, total_positions};
  model.final_lr = config.initial_lr;

  if (config.threads == 1) {
    Rng rng(DeriveSeed(config.seed, 1));
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      worker.Run(0, data.sentences.size(), rng, model.final_lr);
    }
    return model;
  }

  // Multi-worker mode: lock-free shared updates, as in word2vec. The result
  // depends on thread scheduling.
  const unsigned threads = config.threads;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    std::vector<double> lrs(threads, config.initial_lr);
    const std::size_t n = data.sentences.size();
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          Rng rng(DeriveSeed(config.seed, 1 + epoch * threads + t));
          worker.Run(n * t / threads, n * (t + 1) / threads, rng, lrs[t]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    model.final_lr = *std::min_element(lrs.begin(), lrs.end());
  }
  return model;
}

EmbeddingSet Export(const SgnsModel& model) {
  return EmbeddingSet(model.vocab.words, model.input);
}

}  // namespace embed_adapt
