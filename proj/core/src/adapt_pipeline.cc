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

#include "embed_adapt/adapt_pipeline.h"

#include <fstream>
#include <set>
#include <unordered_set>

#include "embed_adapt/dictionary.h"
#include "embed_adapt/digest.h"
#include "embed_adapt/error.h"
#include "embed_adapt/linear_map.h"
#include "embed_adapt/nonlinear_map.h"
#include "embed_adapt/sgns.h"

namespace embed_adapt {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

fs::path Resolve(const fs::path& p, const fs::path& base) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

EmbeddingRef RefFromJson(const json& j, const fs::path& base, const char* what) {
  EmbeddingRef ref;
  if (j.is_string()) {
    ref.path = Resolve(j.get<std::string>(), base);
    ref.format = FormatFromPath(ref.path);
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (key != "path" && key != "format") {
        throw UsageError(std::string("unknown key '") + key + "' in " + what);
      }
    }
    ref.path = Resolve(j.at("path").get<std::string>(), base);
    ref.format = j.contains("format")
                     ? ParseFormat(j.at("format").get<std::string>())
                     : FormatFromPath(ref.path);
  } else {
    throw UsageError(std::string(what) + " must be a path or {path, format}");
  }
  return ref;
}

json RefToJson(const EmbeddingRef& ref) {
  return {{"path", fs::absolute(ref.path).lexically_normal().string()},
          {"format", std::string(FormatName(ref.format))}};
}

const std::set<std::string>& AllowedConfigKeys(Method method) {
  static const std::set<std::string> concat = {"policy"};
  static const std::set<std::string> linear = {"mode", "normalize", "center",
                                               "dict", "freq", "top"};
  static const std::set<std::string> nonlinear = {
      "layers", "activation", "hidden_dim", "folds", "minibatch",
      "max_epochs", "patience", "min_delta", "step", "beta1", "beta2",
      "epsilon", "threads", "dict", "freq", "top"};
  static const std::set<std::string> preinit = {
      "window", "negatives", "lr", "min_count", "epochs", "subsample",
      "threads", "lowercase", "preinit_context"};
  static const std::set<std::string> regularized = [] {
    std::set<std::string> keys = preinit;
    keys.insert({"lambda", "freq"});
    return keys;
  }();
  switch (method) {
    case Method::kConcat: return concat;
    case Method::kLinear: return linear;
    case Method::kNonlinear: return nonlinear;
    case Method::kPreinit: return preinit;
    case Method::kRegularized: return regularized;
  }
  return concat;
}

template <typename T>
T ConfigValue(const json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::optional<fs::path> ConfigPath(const json& config, const char* key) {
  if (!config.contains(key) || config.at(key).is_null()) return std::nullopt;
  return fs::path(config.at(key).get<std::string>());
}

TrainingDictionary DictionaryFor(const AdaptationSpec& spec,
                                 const EmbeddingSet& source,
                                 const EmbeddingSet& target, json& diag) {
  TrainingDictionary dict;
  if (auto path = ConfigPath(spec.config, "dict")) {
    const auto words = ReadWordList(*path);
    dict = DictionaryFromWords(source, target, words);
  } else {
    dict = BuildDictionary(source, target);
  }
  if (spec.config.contains("top")) {
    const auto top = ConfigValue<std::size_t>(spec.config, "top", 0);
    auto freq_path = ConfigPath(spec.config, "freq");
    if (!freq_path) throw UsageError("config 'top' requires 'freq'");
    dict = TruncateByFrequency(dict, ReadFrequencyTable(*freq_path), top);
  }
  diag["dictionary_size"] = dict.size();
  return dict;
}

SgnsConfig SgnsConfigFor(const AdaptationSpec& spec, std::size_t dim) {
  const json& c = spec.config;
  SgnsConfig cfg;
  cfg.dim = dim;
  cfg.window = ConfigValue<std::size_t>(c, "window", cfg.window);
  cfg.negatives = ConfigValue<std::size_t>(c, "negatives", cfg.negatives);
  cfg.initial_lr = ConfigValue<double>(c, "lr", kPreinitLearningRate);
  cfg.min_count = ConfigValue<std::uint64_t>(c, "min_count", cfg.min_count);
  cfg.epochs = ConfigValue<std::size_t>(c, "epochs", cfg.epochs);
  cfg.subsample = ConfigValue<double>(c, "subsample", cfg.subsample);
  cfg.threads = ConfigValue<unsigned>(c, "threads", 1u);
  cfg.preinit_context = ConfigValue<bool>(c, "preinit_context", false);
  cfg.seed = *spec.seed;
  return cfg;
}

json FoldsToJson(const MlpEnsemble& ens) {
  json folds = json::array();
  for (const auto& f : ens.folds) {
    folds.push_back({{"train_size", f.train_size},
                     {"heldout_size", f.heldout_size},
                     {"best_epoch", f.best_epoch},
                     {"initial_heldout_mse", f.initial_heldout_mse},
                     {"heldout_history", f.heldout_history}});
  }
  return folds;
}

std::vector<std::string> SharedWords(const EmbeddingSet& a, const EmbeddingSet& b) {
  std::vector<std::string> words;
  for (const auto& w : a.vocab()) {
    if (b.Contains(w)) words.push_back(w);
  }
  return words;
}

}  // namespace

MissingPolicy ParseMissingPolicy(std::string_view name) {
  if (name == "intersect") return MissingPolicy::kIntersect;
  if (name == "zero_fill") return MissingPolicy::kZeroFill;
  throw UsageError("unknown missing-word policy '" + std::string(name) +
                   "' (expected intersect or zero_fill)");
}

std::string_view MissingPolicyName(MissingPolicy policy) {
  return policy == MissingPolicy::kIntersect ? "intersect" : "zero_fill";
}

EmbeddingSet Concat(const EmbeddingSet& source, const EmbeddingSet& target,
                    MissingPolicy policy) {
  const auto ds = static_cast<Eigen::Index>(source.dim());
  const auto dt = static_cast<Eigen::Index>(target.dim());
  std::vector<std::string> vocab;
  std::vector<std::pair<std::optional<std::size_t>, std::optional<std::size_t>>> rows;
  for (std::size_t i = 0; i < source.size(); ++i) {
    auto t = target.Find(source.word(i));
    if (t || policy == MissingPolicy::kZeroFill) {
      vocab.push_back(source.word(i));
      rows.emplace_back(i, t);
    }
  }
  if (policy == MissingPolicy::kZeroFill) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (!source.Contains(target.word(j))) {
        vocab.push_back(target.word(j));
        rows.emplace_back(std::nullopt, j);
      }
    }
  }
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(vocab.size()), ds + dt);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    if (rows[r].first) {
      out.row(rr).head(ds) =
          source.matrix().row(static_cast<Eigen::Index>(*rows[r].first));
    }
    if (rows[r].second) {
      out.row(rr).tail(dt) =
          target.matrix().row(static_cast<Eigen::Index>(*rows[r].second));
    }
  }
  return EmbeddingSet(std::move(vocab), std::move(out));
}

Method ParseMethod(std::string_view name) {
  if (name == "concat") return Method::kConcat;
  if (name == "preinit") return Method::kPreinit;
  if (name == "regularized") return Method::kRegularized;
  if (name == "linear") return Method::kLinear;
  if (name == "nonlinear") return Method::kNonlinear;
  throw UsageError("unknown adaptation method '" + std::string(name) + "'");
}

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kConcat: return "concat";
    case Method::kPreinit: return "preinit";
    case Method::kRegularized: return "regularized";
    case Method::kLinear: return "linear";
    case Method::kNonlinear: return "nonlinear";
  }
  return "concat";
}

AdaptationSpec AdaptationSpec::FromJson(const json& j, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {"method", "source", "target", "corpus",
                                              "output", "seed", "config", "report"};
  if (!j.is_object()) throw UsageError("spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw UsageError("unknown spec key '" + key + "'");
  }
  try {
    AdaptationSpec spec;
    spec.method = ParseMethod(j.at("method").get<std::string>());
    if (j.contains("source")) spec.source = RefFromJson(j.at("source"), base_dir, "source");
    if (j.contains("target")) spec.target = RefFromJson(j.at("target"), base_dir, "target");
    if (j.contains("corpus")) {
      spec.corpus = Resolve(j.at("corpus").get<std::string>(), base_dir);
    }
    if (!j.contains("output")) throw UsageError("spec is missing 'output'");
    spec.output = RefFromJson(j.at("output"), base_dir, "output");
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("config")) {
      spec.config = j.at("config");
      if (!spec.config.is_object()) throw UsageError("'config' must be an object");
      for (const char* key : {"dict", "freq"}) {
        if (spec.config.contains(key) && spec.config.at(key).is_string()) {
          spec.config[key] =
              Resolve(spec.config.at(key).get<std::string>(), base_dir).string();
        }
      }
    }
    if (j.contains("report")) {
      const json& r = j.at("report");
      Report report;
      for (const auto& [key, value] : r.items()) {
        if (key != "vocab" && key != "k" && key != "out") {
          throw UsageError("unknown report key '" + key + "'");
        }
      }
      if (r.contains("vocab") && !r.at("vocab").is_null()) {
        report.vocab = Resolve(r.at("vocab").get<std::string>(), base_dir);
      }
      report.k = r.value("k", std::size_t{1});
      report.out = Resolve(r.at("out").get<std::string>(), base_dir);
      spec.report = report;
    }
    spec.Validate();
    return spec;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed spec: ") + e.what());
  }
}

AdaptationSpec AdaptationSpec::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spec '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

json AdaptationSpec::ToJson() const {
  json j;
  j["method"] = std::string(MethodName(method));
  if (source) j["source"] = RefToJson(*source);
  if (target) j["target"] = RefToJson(*target);
  if (corpus) j["corpus"] = fs::absolute(*corpus).lexically_normal().string();
  j["output"] = RefToJson(output);
  if (seed) j["seed"] = *seed;
  json cfg = config;
  for (const char* key : {"dict", "freq"}) {
    if (cfg.contains(key) && cfg.at(key).is_string()) {
      cfg[key] = fs::absolute(cfg.at(key).get<std::string>()).lexically_normal().string();
    }
  }
  j["config"] = cfg;
  if (report) {
    j["report"] = {{"k", report->k},
                   {"out", fs::absolute(report->out).lexically_normal().string()}};
    if (report->vocab) {
      j["report"]["vocab"] = fs::absolute(*report->vocab).lexically_normal().string();
    }
  }
  return j;
}

void AdaptationSpec::Validate() const {
  const std::string name(MethodName(method));
  if (!source) throw UsageError(name + " needs a 'source' embedding set");
  switch (method) {
    case Method::kConcat:
    case Method::kLinear:
    case Method::kNonlinear:
      if (!target) throw UsageError(name + " needs a 'target' embedding set");
      break;
    case Method::kPreinit:
    case Method::kRegularized:
      if (!corpus) throw UsageError(name + " needs a target 'corpus'");
      break;
  }
  if ((method == Method::kPreinit || method == Method::kRegularized ||
       method == Method::kNonlinear) &&
      !seed) {
    throw UsageError(name + " is randomized and needs an explicit 'seed'");
  }
  const auto& allowed = AllowedConfigKeys(method);
  for (const auto& [key, value] : config.items()) {
    if (!allowed.count(key)) {
      throw UsageError("config key '" + key + "' does not apply to " + name);
    }
  }
  if (report && report->k == 0) throw UsageError("report k must be positive");
}

RunResult Execute(const AdaptationSpec& spec) {
  spec.Validate();
  json diag = json::object();
  const EmbeddingSet source = Load(spec.source->path, spec.source->format);
  json inputs = {{"source", {{"path", fs::absolute(spec.source->path).string()},
                             {"sha256", Sha256File(spec.source->path)}}}};
  std::optional<EmbeddingSet> target;
  if (spec.target) {
    target = Load(spec.target->path, spec.target->format);
    inputs["target"] = {{"path", fs::absolute(spec.target->path).string()},
                        {"sha256", Sha256File(spec.target->path)}};
  }
  if (spec.corpus && fs::is_regular_file(*spec.corpus)) {
    inputs["corpus"] = {{"path", fs::absolute(*spec.corpus).string()},
                        {"sha256", Sha256File(*spec.corpus)}};
  }
  for (const char* key : {"dict", "freq"}) {
    if (auto p = ConfigPath(spec.config, key)) {
      inputs[key] = {{"path", fs::absolute(*p).string()}, {"sha256", Sha256File(*p)}};
    }
  }

  std::optional<EmbeddingSet> adapted;
  const std::string method(MethodName(spec.method));
  try {
    switch (spec.method) {
      case Method::kConcat: {
        const auto policy =
            ParseMissingPolicy(ConfigValue<std::string>(spec.config, "policy", "intersect"));
        adapted = Concat(source, *target, policy);
        break;
      }
      case Method::kLinear: {
        const auto dict = DictionaryFor(spec, source, *target, diag);
        const auto mode =
            ParseMapMode(ConfigValue<std::string>(spec.config, "mode", "orthogonal"));
        Preprocess pre{ConfigValue<bool>(spec.config, "normalize", true),
                       ConfigValue<bool>(spec.config, "center", true)};
        const LinearFit fit = FitLinear(source, *target, dict, mode, pre);
        diag["rank"] = fit.rank;
        diag["residual"] = fit.residual;
        diag["warnings"] = fit.warnings;
        adapted = ApplyLinear(fit.map, source);
        break;
      }
      case Method::kNonlinear: {
        const auto dict = DictionaryFor(spec, source, *target, diag);
        Architecture arch;
        arch.n_hidden = ConfigValue<std::size_t>(spec.config, "layers", 1);
        arch.hidden_dim = ConfigValue<std::size_t>(spec.config, "hidden_dim", 0);
        arch.activation =
            ParseActivation(ConfigValue<std::string>(spec.config, "activation", "tanh"));
        TrainConfig cfg;
        cfg.folds = ConfigValue<std::size_t>(spec.config, "folds", cfg.folds);
        cfg.minibatch = ConfigValue<std::size_t>(spec.config, "minibatch", cfg.minibatch);
        cfg.max_epochs = ConfigValue<std::size_t>(spec.config, "max_epochs", cfg.max_epochs);
        cfg.patience = ConfigValue<std::size_t>(spec.config, "patience", cfg.patience);
        cfg.min_delta = ConfigValue<double>(spec.config, "min_delta", cfg.min_delta);
        cfg.adam.step = ConfigValue<double>(spec.config, "step", cfg.adam.step);
        cfg.adam.beta1 = ConfigValue<double>(spec.config, "beta1", cfg.adam.beta1);
        cfg.adam.beta2 = ConfigValue<double>(spec.config, "beta2", cfg.adam.beta2);
        cfg.adam.epsilon = ConfigValue<double>(spec.config, "epsilon", cfg.adam.epsilon);
        cfg.threads = ConfigValue<unsigned>(spec.config, "threads", 1u);
        cfg.seed = *spec.seed;
        const MlpEnsemble ens = FitNonlinear(source, *target, dict, arch, cfg);
        adapted = ApplyNonlinear(ens, source);
        const CollapseReport collapse = DetectCollapse(*adapted);
        diag["label"] = arch.Label();
        diag["folds"] = FoldsToJson(ens);
        diag["mean_pairwise_cosine"] = collapse.mean_pairwise_cosine;
        diag["collapsed"] = collapse.collapsed;
        break;
      }
      case Method::kPreinit:
      case Method::kRegularized: {
        const Corpus corpus =
            Corpus::Load(*spec.corpus, ConfigValue<bool>(spec.config, "lowercase", false));
        const SgnsConfig cfg = SgnsConfigFor(spec, source.dim());
        std::optional<RegularizationConfig> reg;
        if (spec.method == Method::kRegularized) {
          reg.emplace();
          reg->lambda = ConfigValue<double>(spec.config, "lambda", 1.0);
          if (auto freq = ConfigPath(spec.config, "freq")) {
            reg->phi = SignificancePhi(ReadFrequencyTable(*freq));
          } else {
            reg->phi = SignificancePhi(BuildVocab(corpus, 1).Frequencies());
          }
        }
        const SgnsModel model = TrainSgns(corpus, cfg, &source, reg ? &*reg : nullptr);
        diag["vocab_size"] = model.vocab.size();
        diag["preinit_overlap"] = model.preinit_overlap;
        if (cfg.threads > 1) {
          diag["warnings"] = {"multi-worker SGNS is not bitwise reproducible"};
        }
        adapted = Export(model);
        break;
      }
    }
  } catch (const Error& e) {
    std::rethrow_exception(WithPrefix(e, method + ": "));
  }

  RunResult result{std::move(*adapted), json::object(), std::nullopt};
  if (spec.report) {
    std::vector<std::string> words =
        spec.report->vocab ? ReadWordList(*spec.report->vocab)
                           : SharedWords(source, result.adapted);
    AnalysisResult analysis =
        Analyze(source, result.adapted, words, spec.report->k);
    diag["report_dropped_words"] = analysis.dropped;
    diag["changed_count"] = analysis.report.changed_count;
    result.report = std::move(analysis.report);
  }
  result.provenance = {
      {"tool", "embed-adapt"},
      {"version", kVersion},
      {"spec", spec.ToJson()},
      {"inputs", inputs},
      {"output",
       {{"path", fs::absolute(spec.output.path).lexically_normal().string()},
        {"format", std::string(FormatName(spec.output.format))},
        {"vocab_size", result.adapted.size()},
        {"dim", result.adapted.dim()},
        {"content_sha256", DigestEmbeddingSet(result.adapted)}}},
      {"diagnostics", diag}};
  return result;
}

fs::path ProvenancePath(const fs::path& output) {
  fs::path p = output;
  p += ".provenance.json";
  return p;
}

RunResult Run(const AdaptationSpec& spec) {
  RunResult result = Execute(spec);
  Save(result.adapted, spec.output.path, spec.output.format);
  result.provenance["output"]["sha256"] = Sha256File(spec.output.path);
  if (spec.report && result.report) WriteReport(*result.report, spec.report->out);
  std::ofstream out(ProvenancePath(spec.output.path), std::ios::trunc);
  if (!out) {
    throw DataError("cannot write provenance record next to '" +
                    spec.output.path.string() + "'");
  }
  out << result.provenance.dump(2) << '\n';
  return result;
}

ReplayCheck ReplayProvenance(const json& provenance) {
  ReplayCheck check;
  AdaptationSpec spec;
  try {
    spec = AdaptationSpec::FromJson(provenance.at("spec"));
    check.recorded_digest =
        provenance.at("output").at("content_sha256").get<std::string>();
    check.inputs_match = true;
    for (const auto& [name, input] : provenance.at("inputs").items()) {
      const fs::path p = input.at("path").get<std::string>();
      if (!fs::exists(p) || Sha256File(p) != input.at("sha256").get<std::string>()) {
        check.inputs_match = false;
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed provenance record: ") + e.what());
  }
  const RunResult replay = Execute(spec);
  check.replayed_digest = DigestEmbeddingSet(replay.adapted);
  check.output_matches = check.replayed_digest == check.recorded_digest;
  return check;
}

AnalysisResult Analyze(const EmbeddingSet& before, const EmbeddingSet& after,
                       std::span<const std::string> shared_vocab, std::size_t k,
                       unsigned threads) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::size_t dropped = 0;
  for (const auto& w : shared_vocab) {
    if (!before.Contains(w) || !after.Contains(w)) {
      ++dropped;
      continue;
    }
    if (seen.insert(w).second) words.push_back(w);
  }
  return {NeighborChangeReport(before, after, words, k, threads), dropped};
}

void WriteReport(const NeighborReport& report, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  if (path.extension() == ".csv") {
    WriteReportCsv(report, out);
  } else {
    out << ReportToJson(report).dump(2) << '\n';
  }
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace embed_adapt
