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

#include "embed_adapt/nonlinear_map.h"

#include <algorithm>
#include <exception>
#include <numeric>
#include <optional>
#include <thread>

#include "embed_adapt/random.h"
#include "embed_adapt/similarity.h"

namespace embed_adapt {
namespace {

RowMatrix Gather(const EmbeddingSet& set, const std::vector<DictionaryPair>& pairs,
                 bool source) {
  RowMatrix out(static_cast<Eigen::Index>(pairs.size()),
                static_cast<Eigen::Index>(set.dim()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t row = source ? pairs[i].src_row : pairs[i].tgt_row;
    if (row >= set.size() || set.word(row) != pairs[i].word) {
      throw UsageError("dictionary entry '" + pairs[i].word +
                       "' does not match the " + (source ? "source" : "target") +
                       " set");
    }
    out.row(static_cast<Eigen::Index>(i)) =
        set.matrix().row(static_cast<Eigen::Index>(row));
  }
  return out;
}

}  // namespace

void TrainConfig::Validate() const {
  if (folds < 2) throw UsageError("fold count must be at least 2");
  if (minibatch < 1) throw UsageError("minibatch size must be at least 1");
  if (patience < 1) throw UsageError("patience must be at least 1");
  if (max_epochs < 1) throw UsageError("max_epochs must be at least 1");
  if (!(adam.step > 0.0) || !(adam.epsilon > 0.0) || adam.beta1 < 0.0 ||
      adam.beta1 >= 1.0 || adam.beta2 < 0.0 || adam.beta2 >= 1.0) {
    throw UsageError("invalid Adam constants");
  }
  if (min_delta < 0.0) throw UsageError("min_delta must be nonnegative");
}

double FoldResult::best_heldout_mse() const {
  return heldout_history.empty()
             ? initial_heldout_mse
             : *std::min_element(heldout_history.begin(), heldout_history.end());
}

FoldResult TrainFold(const EmbeddingSet& source, const EmbeddingSet& target,
                     const std::vector<DictionaryPair>& train,
                     const std::vector<DictionaryPair>& heldout,
                     const Architecture& arch, const TrainConfig& config,
                     std::uint64_t seed) {
  if (train.empty() || heldout.empty()) {
    throw UsageError("training and held-out pair sets must be nonempty");
  }
  {
    std::vector<std::string_view> a, b;
    for (const auto& p : train) a.push_back(p.word);
    for (const auto& p : heldout) b.push_back(p.word);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string_view> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(common));
    if (!common.empty()) {
      throw UsageError("word '" + std::string(common.front()) +
                       "' is in both the training and held-out pairs");
    }
  }
  const RowMatrix x_train = Gather(source, train, true);
  const RowMatrix z_train = Gather(target, train, false);
  const RowMatrix x_held = Gather(source, heldout, true);
  const RowMatrix z_held = Gather(target, heldout, false);

  Rng rng(seed);
  MlpNetwork init =
      MlpNetwork::GlorotUniform(source.dim(), target.dim(), arch, rng);
  AdamOptimizer adam(config.adam, init);

  FoldResult result{init, {}, init.MeanSquaredError(x_held, z_held), 0,
                    train.size(), heldout.size()};

  const auto n = static_cast<Eigen::Index>(train.size());
  const auto batch = static_cast<Eigen::Index>(config.minibatch);
  std::vector<Eigen::Index> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<DenseLayer> gradient;
  RowMatrix xb, zb;

  auto run_epoch = [&](MlpNetwork& net, std::size_t epoch) {
    rng.Shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      xb.resize(len, x_train.cols());
      zb.resize(len, z_train.cols());
      for (Eigen::Index i = 0; i < len; ++i) {
        xb.row(i) = x_train.row(order[static_cast<std::size_t>(start + i)]);
        zb.row(i) = z_train.row(order[static_cast<std::size_t>(start + i)]);
      }
      const double loss = net.LossAndGradient(xb, zb, gradient);
      if (!std::isfinite(loss)) {
        throw NumericalError("training diverged (non-finite loss) at epoch " +
                             std::to_string(epoch));
      }
      adam.Step(net, gradient);
    }
  };
  auto evaluate = [&](const MlpNetwork& net) {
    return net.MeanSquaredError(x_held, z_held);
  };

  auto run = RunWithEarlyStopping(std::move(init), run_epoch, evaluate,
                                  config.patience, config.min_delta,
                                  config.max_epochs);
  result.network = std::move(run.best);
  result.heldout_history = std::move(run.history);
  result.best_epoch = run.best_epoch;
  return result;
}

void MlpEnsemble::Validate() const {
  if (networks.empty()) throw DataError("ensemble has no networks");
  for (const auto& net : networks) {
    net.Validate();
    if (net.layers().size() != networks.front().layers().size() ||
        net.activation() != networks.front().activation()) {
      throw DataError("ensemble networks do not share an architecture");
    }
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      if (net.layers()[i].weights.rows() !=
              networks.front().layers()[i].weights.rows() ||
          net.layers()[i].weights.cols() !=
              networks.front().layers()[i].weights.cols()) {
        throw DataError("ensemble networks do not share an architecture");
      }
    }
  }
}

MlpEnsemble FitNonlinear(const EmbeddingSet& source, const EmbeddingSet& target,
                         const TrainingDictionary& dict,
                         const Architecture& arch, const TrainConfig& config) {
  config.Validate();
  if (dict.size() < config.folds) {
    throw UsageError("dictionary has " + std::to_string(dict.size()) +
                     " pairs, fewer than the " + std::to_string(config.folds) +
                     " folds requested");
  }
  const auto folds = SplitFolds(dict, config.folds, DeriveSeed(config.seed, 0));

  std::vector<std::optional<FoldResult>> results(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  auto train_one = [&](std::size_t f) {
    try {
      std::vector<DictionaryPair> train;
      for (std::size_t g = 0; g < folds.size(); ++g) {
        if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
      }
      results[f] = TrainFold(source, target, train, folds[f], arch, config,
                             DeriveSeed(config.seed, f + 1));
    } catch (const Error& e) {
      errors[f] = WithPrefix(e, "fold " + std::to_string(f) + ": ");
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const unsigned threads = std::max(
      1u, std::min<unsigned>(config.threads, static_cast<unsigned>(folds.size())));
  if (threads == 1) {
    for (std::size_t f = 0; f < folds.size(); ++f) train_one(f);
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t f = t; f < folds.size(); f += threads) train_one(f);
      });
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MlpEnsemble ensemble{{}, arch, config, {}};
  for (auto& r : results) {
    ensemble.folds.push_back({r->train_size, r->heldout_size, r->best_epoch,
                              r->initial_heldout_mse, r->heldout_history});
    ensemble.networks.push_back(std::move(r->network));
  }
  return ensemble;
}

EmbeddingSet ApplyNonlinear(const MlpEnsemble& ensemble,
                            const EmbeddingSet& source) {
  ensemble.Validate();
  if (source.dim() != ensemble.input_dim()) {
    throw UsageError("dimension mismatch: ensemble expects " +
                     std::to_string(ensemble.input_dim()) + "-d input, set is " +
                     std::to_string(source.dim()) + "-d");
  }
  // Running mean: identical member outputs average to themselves exactly.
  RowMatrix mean = ensemble.networks.front().ForwardBatch(source.matrix());
  for (std::size_t i = 1; i < ensemble.networks.size(); ++i) {
    const RowMatrix out = ensemble.networks[i].ForwardBatch(source.matrix());
    mean += (out - mean) / static_cast<double>(i + 1);
  }
  return EmbeddingSet(source.vocab(), std::move(mean));
}

CollapseReport DetectCollapse(const EmbeddingSet& mapped, double threshold) {
  CollapseReport report;
  report.mean_pairwise_cosine = MeanPairwiseCosine(mapped);
  report.collapsed = report.mean_pairwise_cosine > threshold;
  return report;
}

}  // namespace embed_adapt
