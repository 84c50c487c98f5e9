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


#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "embed_adapt/adapt_pipeline.h"
#include "embed_adapt/digest.h"
#include "embed_adapt/error.h"
#include "embed_adapt/linear_map.h"
#include "embed_adapt/nonlinear_map.h"
#include "oracles.h"
#include "test_util.h"

namespace embed_adapt {
namespace {

using nlohmann::json;
using testing::MakeWords;
using testing::RandomSet;
using testing::TempDir;

TEST_CASE("policy and method names") {
  CHECK(ParseMissingPolicy("intersect") == MissingPolicy::kIntersect);
  CHECK(ParseMissingPolicy("zero_fill") == MissingPolicy::kZeroFill);
  CHECK_THROWS_AS(ParseMissingPolicy("union"), UsageError);
  for (auto m : {Method::kConcat, Method::kPreinit, Method::kRegularized,
                 Method::kLinear, Method::kNonlinear}) {
    CHECK(ParseMethod(MethodName(m)) == m);
  }
  CHECK_THROWS_AS(ParseMethod("magic"), UsageError);
}

TEST_CASE("concatenating 300-d sets gives 600-d vectors") {
  Rng rng(1);
  auto a = RandomSet(20, 300, rng);
  auto b = RandomSet(20, 300, rng);
  auto out = Concat(a, b, MissingPolicy::kIntersect);
  CHECK(out.dim() == 600);
  CHECK(out.size() == 20);
  CHECK(out.matrix().row(3).head(300) == a.matrix().row(3));
  CHECK(out.matrix().row(3).tail(300) == b.matrix().row(3));
}

TEST_CASE("self-concatenation preserves cosines and neighbor lists") {
  Rng rng(2);
  auto set = RandomSet(30, 6, rng);
  auto cat = Concat(set, set, MissingPolicy::kIntersect);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      if (i == j) continue;
      CHECK(std::fabs(Cosine(set.row(i), set.row(j)) - Cosine(cat.row(i), cat.row(j))) <= 1e-12);
    }
  }
  NeighborIndex a(set), b(cat);
  for (std::size_t q = 0; q < 30; ++q) {
    CHECK(a.TopKForRow(q, 5).Words() == b.TopKForRow(q, 5).Words());
  }
}

TEST_CASE("zero fill takes the vocabulary union") {
  EmbeddingSet s({"a", "b"}, RowMatrix{{1, 2}, {3, 4}});
  EmbeddingSet t({"b", "c"}, RowMatrix{{5}, {6}});
  auto out = Concat(s, t, MissingPolicy::kZeroFill);
  CHECK(out.vocab() == std::vector<std::string>{"a", "b", "c"});
  CHECK(out.matrix() == RowMatrix{{1, 2, 0}, {3, 4, 5}, {0, 0, 6}});
  auto inter = Concat(s, t, MissingPolicy::kIntersect);
  CHECK(inter.vocab() == std::vector<std::string>{"b"});
  EmbeddingSet other({"x"}, RowMatrix{{1}});
  CHECK(Concat(s, other, MissingPolicy::kIntersect).empty());
}

TEST_CASE("analyze of identical and self-concatenated sets reports no changes") {
  Rng rng(3);
  auto set = RandomSet(40, 5, rng);
  auto same = Analyze(set, set, set.vocab(), 1);
  CHECK(same.report.changed_count == 0);
  CHECK(same.dropped == 0);
  auto cat = Analyze(set, Concat(set, set, MissingPolicy::kIntersect), set.vocab(), 3);
  CHECK(cat.report.changed_count == 0);
}

TEST_CASE("analyze drops words missing from either set") {
  Rng rng(4);
  auto before = RandomSet(10, 3, rng);
  auto after = RandomSet(8, 3, rng);
  auto words = before.vocab();
  words.push_back("zz");
  auto result = Analyze(before, after, words, 1);
  CHECK(result.dropped == 3);
  CHECK(result.report.vocab_size == 8);
}

TEST_CASE("collapsed ensemble output matches a brute-force recount") {
  Rng rng(5);
  auto before = RandomSet(25, 4, rng);
  Architecture arch;
  auto net = MlpNetwork::Zeros(4, 4, arch);
  net.mutable_layers().back().bias.setConstant(0.25);
  MlpEnsemble ens{{net, net}, arch, {}, {}};
  auto after = ApplyNonlinear(ens, before);
  for (std::size_t k : {1, 3}) {
    auto result = Analyze(before, after, before.vocab(), k);
    CHECK(result.report.changed_count ==
          testing::BruteForceChangedCount(before, after, before.vocab(), k));
    // Every collapsed list is the lowest-index words other than the query.
    CHECK(result.report.per_word[5].after.Words()[0] == "w0");
  }
  // All-zero parameters map every word to the zero vector, where cosine is
  // undefined.
  MlpEnsemble zero{{MlpNetwork::Zeros(4, 4, arch)}, arch, {}, {}};
  CHECK_THROWS_AS(Analyze(before, ApplyNonlinear(zero, before), before.vocab(), 1),
                  NumericalError);
}

struct Workspace {
  TempDir dir;
  EmbeddingSet source;
  EmbeddingSet target;

  explicit Workspace(std::uint64_t seed, std::size_t n = 50, std::size_t d = 6)
      : source(EmbeddingSet::Empty(1)), target(EmbeddingSet::Empty(1)) {
    Rng rng(seed);
    source = RandomSet(n, d, rng);
    target = RandomSet(n, d, rng);
    Save(source, dir / "source.vec", Format::kText);
    Save(target, dir / "target.bin", Format::kBinary);
  }
};

TEST_CASE("spec parsing resolves paths and formats") {
  TempDir dir;
  json j = {{"method", "linear"},
            {"source", "s.vec"},
            {"target", {{"path", "t.dat"}, {"format", "binary"}}},
            {"output", "out/o.bin"},
            {"config", {{"mode", "ls"}, {"dict", "d.txt"}}}};
  auto spec = AdaptationSpec::FromJson(j, dir.path());
  CHECK(spec.source->path == dir / "s.vec");
  CHECK(spec.source->format == Format::kText);
  CHECK(spec.target->format == Format::kBinary);
  CHECK(spec.output.format == Format::kBinary);
  CHECK(spec.config.at("dict") == (dir / "d.txt").string());
  auto round = AdaptationSpec::FromJson(spec.ToJson());
  CHECK(round.ToJson() == spec.ToJson());
}

TEST_CASE("spec validation") {
  auto bad = [](json j) {
    CHECK_THROWS_AS(AdaptationSpec::FromJson(j), UsageError);
  };
  bad({{"method", "linear"}, {"source", "a"}, {"output", "o"}});
  bad({{"method", "preinit"}, {"source", "a"}, {"output", "o"}, {"seed", 1}});
  bad({{"method", "preinit"}, {"source", "a"}, {"corpus", "c"}, {"output", "o"}});
  bad({{"method", "nonlinear"}, {"source", "a"}, {"target", "b"}, {"output", "o"}});
  bad({{"method", "concat"}, {"source", "a"}, {"target", "b"}});
  bad({{"method", "concat"}, {"source", "a"}, {"target", "b"}, {"output", "o"},
       {"config", {{"mode", "ls"}}}});
  bad({{"method", "concat"}, {"source", "a"}, {"target", "b"}, {"output", "o"},
       {"extra", 1}});
  bad({{"method", "concat"}, {"source", "a"}, {"target", "b"}, {"output", "o"},
       {"report", {{"out", "r.json"}, {"k", 0}}}});
  bad({{"method", "concat"}, {"source", 3}, {"target", "b"}, {"output", "o"}});
  bad(json::array());
  CHECK_NOTHROW(AdaptationSpec::FromJson(
      {{"method", "regularized"}, {"source", "a"}, {"corpus", "c"}, {"output", "o"},
       {"seed", 3}, {"config", {{"lambda", 2.0}, {"epochs", 1}}}}));
}

TEST_CASE("concat spec equals a direct concat call") {
  Workspace ws(6);
  json j = {{"method", "concat"},
            {"source", "source.vec"},
            {"target", "target.bin"},
            {"output", "cat.vec"}};
  auto spec = AdaptationSpec::FromJson(j, ws.dir.path());
  auto result = Run(spec);
  auto target_loaded = Load(ws.dir / "target.bin", Format::kBinary);
  auto direct = Concat(ws.source, target_loaded, MissingPolicy::kIntersect);
  CHECK(result.adapted == direct);
  CHECK(Load(ws.dir / "cat.vec", Format::kText) == direct);
  CHECK(std::filesystem::exists(ProvenancePath(ws.dir / "cat.vec")));
}

TEST_CASE("linear spec on identical sets maps by the identity") {
  Workspace ws(7);
  json j = {{"method", "linear"},
            {"source", "source.vec"},
            {"target", "source.vec"},
            {"output", "lin.vec"},
            {"config", {{"mode", "orthogonal"}}}};
  auto result = Execute(AdaptationSpec::FromJson(j, ws.dir.path()));
  auto dict = BuildDictionary(ws.source, ws.source);
  const auto fit = FitLinear(ws.source, ws.source, dict, MapMode::kOrthogonal, Preprocess{});
  const RowMatrix pre = PreprocessRows(ws.source.matrix(), true, fit.map.source_mean);
  CHECK((result.adapted.matrix() - pre).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(result.provenance.at("diagnostics").at("dictionary_size") == 50);
}

TEST_CASE("provenance records inputs, digests and configuration") {
  Workspace ws(8);
  json j = {{"method", "nonlinear"},
            {"source", "source.vec"},
            {"target", "target.bin"},
            {"output", "nl.vec"},
            {"seed", 99},
            {"config", {{"folds", 2}, {"max_epochs", 3}}},
            {"report", {{"out", "report.json"}, {"k", 2}}}};
  auto spec = AdaptationSpec::FromJson(j, ws.dir.path());
  auto result = Run(spec);
  std::ifstream in(ProvenancePath(ws.dir / "nl.vec"));
  json prov = json::parse(in);
  CHECK(prov == result.provenance);
  CHECK(prov.at("tool") == "embed-adapt");
  CHECK(prov.at("spec").at("seed") == 99);
  CHECK(prov.at("inputs").at("source").at("sha256") == Sha256File(ws.dir / "source.vec"));
  CHECK(prov.at("output").at("content_sha256") == DigestEmbeddingSet(result.adapted));
  CHECK(prov.at("output").at("sha256") == Sha256File(ws.dir / "nl.vec"));
  CHECK(prov.at("diagnostics").at("label") == "1-layer tanh");
  CHECK(prov.at("diagnostics").at("folds").size() == 2);
  REQUIRE(result.report.has_value());
  std::ifstream rin(ws.dir / "report.json");
  auto report = ReportFromJson(json::parse(rin));
  CHECK(report.k == 2);
  CHECK(report.changed_count == result.report->changed_count);
}

TEST_CASE("replaying provenance reproduces the output digest") {
  Workspace ws(9);
  json j = {{"method", "nonlinear"},
            {"source", "source.vec"},
            {"target", "target.bin"},
            {"output", "nl.vec"},
            {"seed", 4},
            {"config", {{"folds", 3}, {"max_epochs", 5}, {"layers", 5}, {"activation", "relu"}}}};
  auto first = Run(AdaptationSpec::FromJson(j, ws.dir.path()));
  auto check = ReplayProvenance(first.provenance);
  CHECK(check.inputs_match);
  CHECK(check.output_matches);
  CHECK(check.replayed_digest == DigestEmbeddingSet(first.adapted));

  // Same spec again, identical digest.
  auto second = Execute(AdaptationSpec::FromJson(j, ws.dir.path()));
  CHECK(DigestEmbeddingSet(second.adapted) == DigestEmbeddingSet(first.adapted));

  // Changing an input is detected.
  Rng rng(1);
  Save(RandomSet(50, 6, rng), ws.dir / "source.vec", Format::kText);
  auto changed = ReplayProvenance(first.provenance);
  CHECK_FALSE(changed.inputs_match);
  CHECK_FALSE(changed.output_matches);
}

TEST_CASE("preinit and regularized specs run from a corpus") {
  TempDir dir;
  Rng rng(10);
  auto planted = testing::MakePlantedCorpus(100, 5, 6, 8, rng);
  testing::WriteFile(dir / "corpus.txt", planted.text);
  std::vector<std::string> words = {"sun", "moon", "f0_1", "elsewhere"};
  EmbeddingSet pre(words, testing::GaussianMatrix(4, 8, rng, 0.1));
  Save(pre, dir / "pre.vec", Format::kText);
  for (std::string method : {"preinit", "regularized"}) {
    json j = {{"method", method},
              {"source", "pre.vec"},
              {"corpus", "corpus.txt"},
              {"output", method + ".vec"},
              {"seed", 5},
              {"config", {{"epochs", 2}, {"min_count", 2}}},
              {"report", {{"out", method + ".csv"}}}};
    auto result = Run(AdaptationSpec::FromJson(j, dir.path()));
    CHECK(result.adapted.dim() == 8);
    CHECK(result.provenance.at("diagnostics").at("preinit_overlap") == 3);
    CHECK(result.report->vocab_size == 3);
    CHECK(testing::ReadFile(dir / (method + ".csv")).rfind("word,changed,rank", 0) == 0);
    CHECK(ReplayProvenance(result.provenance).output_matches);
  }
}

TEST_CASE("errors carry the method name") {
  Workspace ws(11);
  json j = {{"method", "linear"},
            {"source", "source.vec"},
            {"target", "target.bin"},
            {"output", "o.vec"},
            {"config", {{"top", 3}}}};
  try {
    Execute(AdaptationSpec::FromJson(j, ws.dir.path()));
    FAIL("expected an error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).rfind("linear: ", 0) == 0);
  }
  json missing = {{"method", "concat"},
                  {"source", "nope.vec"},
                  {"target", "target.bin"},
                  {"output", "o.vec"}};
  CHECK_THROWS_AS(Execute(AdaptationSpec::FromJson(missing, ws.dir.path())), DataError);
  CHECK_THROWS_AS(AdaptationSpec::Load(ws.dir / "absent.json"), DataError);
  testing::WriteFile(ws.dir / "broken.json", "{not json");
  CHECK_THROWS_AS(AdaptationSpec::Load(ws.dir / "broken.json"), DataError);
}

}  // namespace
}  // namespace embed_adapt
