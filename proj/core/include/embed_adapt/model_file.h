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

#ifndef EMBED_ADAPT_MODEL_FILE_H_
#define EMBED_ADAPT_MODEL_FILE_H_

#include <filesystem>
#include <iosfwd>

#include "embed_adapt/linear_map.h"
#include "embed_adapt/nonlinear_map.h"

namespace embed_adapt {

// Versioned little-endian containers for fitted maps.
//
// Linear map (magic "EALINMAP"):
//   u32 version | u8 mode (0 ls, 1 orthogonal) | u8 flags (bit0 normalize,
//   bit1 center) | u16 zero | u64 d_src | u64 d_tgt |
//   f64 W[d_src * d_tgt] row-major | if centered: f64 source_mean[d_src],
//   f64 target_mean[d_tgt]
//
// MLP ensemble (magic "EAMLPENS"):
//   u32 version | u8 activation (0 tanh, 1 relu) | u8[3] zero |
//   u64 n_hidden | u64 hidden_dim |
//   u64 folds | u64 minibatch | f64 step, beta1, beta2, epsilon |
//   u64 patience | u64 max_epochs | f64 min_delta | u64 seed |
//   u64 K | K x (u64 n_layers | n_layers x (u64 rows | u64 cols |
//   f64 weights[rows * cols] row-major | f64 bias[cols]))
inline constexpr std::uint32_t kModelFileVersion = 1;

enum class ModelKind { kLinearMap, kEnsemble };

void WriteLinearMap(const LinearMap& map, std::ostream& out);
LinearMap ReadLinearMap(std::istream& in);
void SaveLinearMap(const LinearMap& map, const std::filesystem::path& path);
LinearMap LoadLinearMap(const std::filesystem::path& path);

void WriteEnsemble(const MlpEnsemble& ensemble, std::ostream& out);
MlpEnsemble ReadEnsemble(std::istream& in);
void SaveEnsemble(const MlpEnsemble& ensemble, const std::filesystem::path& path);
MlpEnsemble LoadEnsemble(const std::filesystem::path& path);

// Inspects the magic bytes; throws DataError for anything else.
ModelKind DetectModelKind(const std::filesystem::path& path);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_MODEL_FILE_H_
