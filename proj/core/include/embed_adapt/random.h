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

#ifndef EMBED_ADAPT_RANDOM_H_
#define EMBED_ADAPT_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace embed_adapt {

// Seeded generator with platform-independent derived distributions.
// The standard library's distribution algorithms are implementation-defined,
// so uniform/normal/shuffle are implemented here on top of mt19937_64,
// whose output sequence is fixed by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound);

  // Standard normal via Box-Muller.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mix of (seed, stream); used to give independent workers
// (folds, threads) their own well-separated seeds.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_RANDOM_H_
