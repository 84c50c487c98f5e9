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

#ifndef EMBED_ADAPT_ADAPT_PIPELINE_H_
#define EMBED_ADAPT_ADAPT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embed_adapt/embedding_io.h"
#include "embed_adapt/embedding_set.h"
#include "embed_adapt/similarity.h"

namespace embed_adapt {

enum class MissingPolicy { kIntersect, kZeroFill };

MissingPolicy ParseMissingPolicy(std::string_view name);
std::string_view MissingPolicyName(MissingPolicy policy);

// [source ; target] per word, dimension d_s + d_t.
//   intersect: shared words only, in source order.
//   zero_fill: source words in source order, then target-only words in
//              target order; the missing half is zero.
EmbeddingSet Concat(const EmbeddingSet& source, const EmbeddingSet& target,
                    MissingPolicy policy);

enum class Method { kConcat, kPreinit, kRegularized, kLinear, kNonlinear };

Method ParseMethod(std::string_view name);
std::string_view MethodName(Method method);

struct EmbeddingRef {
  std::filesystem::path path;
  Format format = Format::kText;
};

// One adaptation job, usually read from spec.json:
//
//   {
//     "method": "concat" | "preinit" | "regularized" | "linear" | "nonlinear",
//     "source": {"path": "...", "format": "text"},   // embedding set
//     "target": {"path": "...", "format": "text"},   // concat/linear/nonlinear
//     "corpus": "...",                               // preinit/regularized
//     "output": {"path": "...", "format": "text"},
//     "seed": 7,                                     // preinit/regularized/nonlinear
//     "config": {...},                               // method-specific
//     "report": {"vocab": "...", "k": 1, "out": "report.json"}  // optional
//   }
//
// Relative paths are resolved against the directory holding the spec file.
// Unknown keys are rejected.
struct AdaptationSpec {
  Method method = Method::kConcat;
  std::optional<EmbeddingRef> source;
  std::optional<EmbeddingRef> target;
  std::optional<std::filesystem::path> corpus;
  EmbeddingRef output;
  std::optional<std::uint64_t> seed;
  nlohmann::json config = nlohmann::json::object();

  struct Report {
    std::optional<std::filesystem::path> vocab;  // default: shared words
    std::size_t k = 1;
    std::filesystem::path out;
  };
  std::optional<Report> report;

  static AdaptationSpec FromJson(const nlohmann::json& json,
                                 const std::filesystem::path& base_dir = {});
  static AdaptationSpec Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  // Required inputs per method, explicit seeds, and config keys.
  void Validate() const;
};

struct RunResult {
  EmbeddingSet adapted;
  nlohmann::json provenance;
  std::optional<NeighborReport> report;
};

// Runs the adaptation in memory; nothing is written.
RunResult Execute(const AdaptationSpec& spec);

// Execute, then write the adapted set, "<output>.provenance.json" and the
// optional report.
RunResult Run(const AdaptationSpec& spec);

std::filesystem::path ProvenancePath(const std::filesystem::path& output);

// Re-executes the spec recorded in a provenance record and checks that the
// inputs still have their recorded digests and that the adapted set has
// the recorded content digest.
struct ReplayCheck {
  bool inputs_match = false;
  bool output_matches = false;
  std::string recorded_digest;
  std::string replayed_digest;
};
ReplayCheck ReplayProvenance(const nlohmann::json& provenance);

struct AnalysisResult {
  NeighborReport report;
  std::size_t dropped = 0;  // listed words missing from either set
};

// Neighbor-change report over the listed words present in both sets.
AnalysisResult Analyze(const EmbeddingSet& before, const EmbeddingSet& after,
                       std::span<const std::string> shared_vocab,
                       std::size_t k, unsigned threads = 1);

// Writes JSON, or CSV when the path ends in ".csv".
void WriteReport(const NeighborReport& report, const std::filesystem::path& path);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_ADAPT_PIPELINE_H_
