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

#ifndef EMBED_ADAPT_NONLINEAR_MAP_H_
#define EMBED_ADAPT_NONLINEAR_MAP_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "embed_adapt/dictionary.h"
#include "embed_adapt/embedding_set.h"
#include "embed_adapt/error.h"
#include "embed_adapt/mlp.h"

namespace embed_adapt {

struct TrainConfig {
  std::size_t folds = 10;
  std::size_t minibatch = 5;
  AdamConfig adam;
  std::size_t patience = 1;     // non-improving epochs tolerated
  std::size_t max_epochs = 500;
  double min_delta = 0.0;       // an epoch improves only if mse < best - min_delta
  std::uint64_t seed = 0;
  unsigned threads = 1;         // folds trained concurrently

  void Validate() const;
};

// Tracks held-out error across epochs. An observation is an improvement
// when it beats the best so far by more than min_delta; training should
// stop after `patience` consecutive non-improving observations.
class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, double min_delta)
      : patience_(patience), min_delta_(min_delta) {}

  // Returns true when `value` is the new best.
  bool Observe(double value) {
    ++epochs_;
    if (value < best_ - min_delta_) {
      best_ = value;
      best_epoch_ = epochs_;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool ShouldStop() const { return stale_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 = none
  std::size_t epochs() const { return epochs_; }

 private:
  std::size_t patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t epochs_ = 0;
  std::size_t stale_ = 0;
};

template <typename State>
struct EarlyStoppedRun {
  State best;
  std::vector<double> history;  // held-out error after each epoch
  std::size_t best_epoch = 0;
};

// Generic epoch loop: run_epoch(state, epoch) trains one epoch in place,
// evaluate(state) returns the held-out error. Keeps a copy of the state with
// the lowest error and stops per EarlyStopping or at max_epochs.
template <typename State, typename RunEpoch, typename Evaluate>
EarlyStoppedRun<State> RunWithEarlyStopping(State state, RunEpoch&& run_epoch,
                                            Evaluate&& evaluate,
                                            std::size_t patience,
                                            double min_delta,
                                            std::size_t max_epochs) {
  EarlyStopping stopper(patience, min_delta);
  EarlyStoppedRun<State> run{state, {}, 0};
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    run_epoch(state, epoch);
    const double err = evaluate(state);
    if (!std::isfinite(err)) {
      throw NumericalError("held-out error became non-finite at epoch " +
                           std::to_string(epoch));
    }
    run.history.push_back(err);
    if (stopper.Observe(err)) run.best = state;
    if (stopper.ShouldStop()) break;
  }
  run.best_epoch = stopper.best_epoch();
  return run;
}

struct FoldResult {
  MlpNetwork network;                 // best held-out snapshot
  std::vector<double> heldout_history;
  double initial_heldout_mse = 0.0;   // before the first update
  std::size_t best_epoch = 0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;

  double best_heldout_mse() const;
};

// Minibatch Adam on shuffled training pairs, minimizing the mean squared
// error between mapped source and target vectors; the held-out error is
// measured after every epoch. Throws NumericalError on divergence.
FoldResult TrainFold(const EmbeddingSet& source, const EmbeddingSet& target,
                     const std::vector<DictionaryPair>& train,
                     const std::vector<DictionaryPair>& heldout,
                     const Architecture& arch, const TrainConfig& config,
                     std::uint64_t seed);

struct FoldSummary {
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
  std::size_t best_epoch = 0;
  double initial_heldout_mse = 0.0;
  std::vector<double> heldout_history;
};

// One network per fold; the mapping is the mean of their outputs.
struct MlpEnsemble {
  std::vector<MlpNetwork> networks;
  Architecture arch;
  TrainConfig config;
  std::vector<FoldSummary> folds;  // empty for loaded or hand-built ensembles

  std::size_t input_dim() const { return networks.front().input_dim(); }
  std::size_t output_dim() const { return networks.front().output_dim(); }
  void Validate() const;
};

// Splits the dictionary into config.folds folds and trains fold i on the
// remaining folds with fold i held out. Deterministic given config.seed,
// independent of config.threads.
MlpEnsemble FitNonlinear(const EmbeddingSet& source, const EmbeddingSet& target,
                         const TrainingDictionary& dict,
                         const Architecture& arch, const TrainConfig& config);

// Output row for word w is (1/K) sum_i forward(net_i, x_w), over the full
// source vocabulary.
EmbeddingSet ApplyNonlinear(const MlpEnsemble& ensemble,
                            const EmbeddingSet& source);

struct CollapseReport {
  double mean_pairwise_cosine = 0.0;
  bool collapsed = false;
};

inline constexpr double kCollapseThreshold = 0.95;

// Flags a mapped space whose vectors crowd into one direction.
CollapseReport DetectCollapse(const EmbeddingSet& mapped,
                              double threshold = kCollapseThreshold);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_NONLINEAR_MAP_H_
