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


#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "embed_adapt/dictionary.h"
#include "embed_adapt/embedding_set.h"
#include "embed_adapt/linear_map.h"
#include "embed_adapt/mlp.h"
#include "embed_adapt/random.h"
#include "embed_adapt/sgns.h"
#include "embed_adapt/similarity.h"

namespace embed_adapt {
namespace {

RowMatrix Gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  return m;
}

EmbeddingSet RandomSet(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return EmbeddingSet(std::move(words), Gaussian(n, d, rng));
}

void BM_TopK(benchmark::State& state) {
  Rng rng(1);
  const auto set = RandomSet(static_cast<std::size_t>(state.range(0)), 300, rng);
  const NeighborIndex index(set);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.TopKForRow(q, 10));
    q = (q + 1) % set.size();
  }
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(10000);

void BM_NeighborChangeReport(benchmark::State& state) {
  Rng rng(2);
  const auto before = RandomSet(2000, 100, rng);
  const auto after = RandomSet(2000, 100, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(NeighborChangeReport(before, after, before.vocab(), 10));
  }
}
BENCHMARK(BM_NeighborChangeReport)->Unit(benchmark::kMillisecond);

void BM_FitLinear(benchmark::State& state) {
  Rng rng(3);
  const auto source = RandomSet(5000, static_cast<std::size_t>(state.range(0)), rng);
  const auto target = RandomSet(5000, static_cast<std::size_t>(state.range(0)), rng);
  const auto dict = BuildDictionary(source, target);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitLinear(source, target, dict, MapMode::kOrthogonal, Preprocess{}));
  }
}
BENCHMARK(BM_FitLinear)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_MlpLossAndGradient(benchmark::State& state) {
  Rng rng(4);
  Architecture arch;
  arch.n_hidden = static_cast<std::size_t>(state.range(0));
  const auto net = MlpNetwork::GlorotUniform(300, 300, arch, rng);
  const RowMatrix x = Gaussian(5, 300, rng);
  const RowMatrix z = Gaussian(5, 300, rng);
  std::vector<DenseLayer> gradient;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.LossAndGradient(x, z, gradient));
  }
}
BENCHMARK(BM_MlpLossAndGradient)->Arg(1)->Arg(5);

void BM_SgnsPairLoss(benchmark::State& state) {
  Rng rng(5);
  const RowMatrix m = Gaussian(8, 300, rng);
  auto row = [&](Eigen::Index r) { return std::span<const double>(m.row(r).data(), 300); };
  std::vector<std::span<const double>> negatives;
  for (Eigen::Index r = 2; r < 7; ++r) negatives.push_back(row(r));
  SgnsPairGradient gradient;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SgnsPairLoss(row(0), row(1), negatives, row(7), 0.5, &gradient));
  }
}
BENCHMARK(BM_SgnsPairLoss);

void BM_TrainSgnsEpoch(benchmark::State& state) {
  Rng rng(6);
  std::ostringstream text;
  for (int line = 0; line < 2000; ++line) {
    for (int i = 0; i < 12; ++i) text << 'w' << rng.Below(500) << ' ';
    text << '\n';
  }
  std::istringstream in(text.str());
  const Corpus corpus = Corpus::FromStream(in);
  SgnsConfig config;
  config.dim = 100;
  config.epochs = 1;
  config.min_count = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainSgns(corpus, config));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(corpus.TokenCount()));
}
BENCHMARK(BM_TrainSgnsEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace embed_adapt

BENCHMARK_MAIN();
