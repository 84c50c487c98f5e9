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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "embed_adapt/adapt_pipeline.h"
#include "embed_adapt/dictionary.h"
#include "embed_adapt/embedding_io.h"
#include "embed_adapt/error.h"
#include "embed_adapt/linear_map.h"
#include "embed_adapt/model_file.h"
#include "embed_adapt/nonlinear_map.h"
#include "embed_adapt/sgns.h"
#include "embed_adapt/similarity.h"

namespace embed_adapt {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 1;

// An embedding path plus an optional explicit format; the extension decides
// otherwise.
struct SetArg {
  std::string path;
  std::string format;

  Format ResolvedFormat() const {
    return format.empty() ? FormatFromPath(path) : ParseFormat(format);
  }
  EmbeddingSet Load() const { return embed_adapt::Load(path, ResolvedFormat()); }
};

void AddSetOption(CLI::App* cmd, const std::string& name, SetArg& arg,
                  const std::string& help, bool required = true) {
  auto* opt = cmd->add_option("--" + name, arg.path, help);
  if (required) opt->required();
  cmd->add_option("--" + name + "-format", arg.format,
                  "text or binary (default: from extension, .bin is binary)")
      ->check(CLI::IsMember({"text", "binary"}));
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          std::ostream& err) {
  std::uint64_t seed = kDefaultSeed;
  const char* source = "default";
  if (flag) {
    seed = *flag;
    source = "--seed";
  } else if (const char* env = std::getenv("EMBED_ADAPT_SEED")) {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("EMBED_ADAPT_SEED is not an integer: ") + env);
    }
    source = "EMBED_ADAPT_SEED";
  }
  err << "seed: " << seed << " (" << source << ")\n";
  return seed;
}

TrainingDictionary LoadOrBuildDictionary(const std::string& dict_path,
                                         const EmbeddingSet& source,
                                         const EmbeddingSet& target) {
  if (dict_path.empty()) return BuildDictionary(source, target);
  const auto words = ReadWordList(dict_path);
  return DictionaryFromWords(source, target, words);
}

TrainingDictionary MaybeTruncate(TrainingDictionary dict, const std::string& freq,
                                 std::size_t top) {
  if (top == 0) return dict;
  if (freq.empty()) throw UsageError("--top requires --freq");
  return TruncateByFrequency(dict, ReadFrequencyTable(freq), top);
}

void EmitJson(const nlohmann::json& payload, const std::string& out_path,
              std::ostream& out) {
  if (out_path.empty()) {
    out << payload.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path, std::ios::trunc);
  if (!f) throw DataError("cannot open '" + out_path + "' for writing");
  f << payload.dump(2) << '\n';
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"embed-adapt: word-embedding domain adaptation and neighbor analysis"};
  app.name("embed-adapt");
  app.require_subcommand(1);
  std::function<void()> handler;

  // convert
  SetArg conv_in, conv_out;
  {
    auto* cmd = app.add_subcommand("convert", "Convert between text and binary formats");
    cmd->add_option("--in", conv_in.path, "input embedding file")->required();
    cmd->add_option("--in-format", conv_in.format)->check(CLI::IsMember({"text", "binary"}));
    cmd->add_option("--out", conv_out.path, "output embedding file")->required();
    cmd->add_option("--out-format", conv_out.format)->check(CLI::IsMember({"text", "binary"}));
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet set = conv_in.Load();
        Save(set, conv_out.path, conv_out.ResolvedFormat());
        err << "converted " << set.size() << " x " << set.dim() << '\n';
      };
    });
  }

  // neighbors
  SetArg nb_set;
  std::vector<std::string> nb_queries;
  std::size_t nb_k = 10;
  std::string nb_out;
  {
    auto* cmd = app.add_subcommand("neighbors", "Exact top-k cosine neighbors of query words");
    AddSetOption(cmd, "set", nb_set, "embedding file");
    cmd->add_option("--query", nb_queries, "query word (repeatable)")->required();
    cmd->add_option("-k,--k", nb_k, "neighbors per query")->check(CLI::PositiveNumber);
    cmd->add_option("--out", nb_out, "write JSON here instead of standard output");
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet set = nb_set.Load();
        const NeighborIndex index(set);
        nlohmann::json payload = nlohmann::json::array();
        for (const auto& q : nb_queries) {
          const NeighborList list = index.TopK(q, nb_k);
          nlohmann::json neighbors = nlohmann::json::array();
          for (const auto& n : list.neighbors) {
            neighbors.push_back({{"word", n.word}, {"cosine", n.cosine}});
          }
          payload.push_back({{"query", q}, {"neighbors", neighbors}});
        }
        EmitJson(payload, nb_out, out);
      };
    });
  }

  // nn-diff and analyze share their flags.
  struct DiffArgs {
    SetArg before, after;
    std::string vocab;
    std::size_t k = 1;
    std::string out;
    unsigned threads = 1;
  };
  DiffArgs diff, analyze;
  auto add_diff = [&](const char* name, const char* help, DiffArgs& a, bool strict) {
    auto* cmd = app.add_subcommand(name, help);
    AddSetOption(cmd, "before", a.before, "embedding set before adaptation");
    AddSetOption(cmd, "after", a.after, "embedding set after adaptation");
    cmd->add_option("--vocab", a.vocab, "word list restricting the analysis")->required();
    cmd->add_option("-k,--k", a.k, "neighbors compared per word")->check(CLI::PositiveNumber);
    cmd->add_option("--out", a.out, "report path (.json or .csv); default standard output");
    cmd->add_option("--threads", a.threads)->check(CLI::PositiveNumber);
    cmd->callback([&, strict] {
      handler = [&, strict] {
        const EmbeddingSet before = a.before.Load();
        const EmbeddingSet after = a.after.Load();
        const auto words = ReadWordList(a.vocab);
        NeighborReport report;
        if (strict) {
          report = NeighborChangeReport(before, after, words, a.k, a.threads);
        } else {
          AnalysisResult r = Analyze(before, after, words, a.k, a.threads);
          if (r.dropped) err << r.dropped << " listed words missing from a set were skipped\n";
          report = std::move(r.report);
        }
        err << report.changed_count << " of " << report.vocab_size
            << " words changed their top-" << report.k << " neighbors\n";
        if (a.out.empty()) {
          out << ReportToJson(report).dump(2) << '\n';
        } else {
          WriteReport(report, a.out);
        }
      };
    });
  };
  add_diff("nn-diff", "Neighbor-change report; every listed word must be in both sets",
           diff, true);
  add_diff("analyze", "Neighbor-change report over the listed words shared by both sets",
           analyze, false);

  // neighbor-table
  std::vector<std::string> table_sets, table_queries;
  std::string table_queries_file, table_out;
  std::size_t table_k = 5;
  {
    auto* cmd = app.add_subcommand("neighbor-table", "Side-by-side neighbors across embedding sets");
    cmd->add_option("--set", table_sets, "name=path (repeatable; .bin is binary)")->required();
    cmd->add_option("--query", table_queries, "query word (repeatable)");
    cmd->add_option("--queries", table_queries_file, "file with one query per line");
    cmd->add_option("-k,--k", table_k)->check(CLI::PositiveNumber);
    cmd->add_option("--out", table_out, "TSV path; default standard output");
    cmd->callback([&] {
      handler = [&] {
        std::vector<EmbeddingSet> sets;
        std::vector<std::string> names;
        for (const auto& spec : table_sets) {
          const auto eq = spec.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw UsageError("--set expects name=path, got '" + spec + "'");
          }
          names.push_back(spec.substr(0, eq));
          const fs::path p = spec.substr(eq + 1);
          sets.push_back(Load(p, FormatFromPath(p)));
        }
        std::vector<NamedSet> named;
        for (std::size_t i = 0; i < sets.size(); ++i) named.push_back({names[i], sets[i]});
        auto queries = table_queries;
        if (!table_queries_file.empty()) {
          for (auto& q : ReadWordList(table_queries_file)) queries.push_back(std::move(q));
        }
        if (queries.empty()) throw UsageError("give --query or --queries");
        const auto rows = NeighborTable(named, queries, table_k);
        if (table_out.empty()) {
          WriteNeighborTable(rows, out);
        } else {
          std::ofstream f(table_out, std::ios::trunc);
          if (!f) throw DataError("cannot open '" + table_out + "' for writing");
          WriteNeighborTable(rows, f);
        }
      };
    });
  }

  // dict
  SetArg dict_source, dict_target;
  std::string dict_freq, dict_out;
  std::size_t dict_top = 0;
  {
    auto* cmd = app.add_subcommand("dict", "Shared-vocabulary pivot dictionary");
    AddSetOption(cmd, "source", dict_source, "source embedding file");
    AddSetOption(cmd, "target", dict_target, "target embedding file");
    cmd->add_option("--freq", dict_freq, "word<TAB>count file ranking the pivots");
    cmd->add_option("--top", dict_top, "keep the n most frequent pivots")->check(CLI::PositiveNumber);
    cmd->add_option("--out", dict_out, "dictionary file (one word per line)")->required();
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet source = dict_source.Load();
        const EmbeddingSet target = dict_target.Load();
        const auto dict = MaybeTruncate(BuildDictionary(source, target), dict_freq, dict_top);
        WriteWordList(dict.Words(), dict_out);
        err << dict.size() << " pivot words\n";
      };
    });
  }

  // train-linear
  SetArg lin_source, lin_target;
  std::string lin_dict, lin_mode = "orthogonal", lin_out, lin_freq;
  bool lin_no_center = false, lin_no_normalize = false;
  std::size_t lin_top = 0;
  {
    auto* cmd = app.add_subcommand("train-linear", "Fit a linear source-to-target map");
    AddSetOption(cmd, "source", lin_source, "source embedding file");
    AddSetOption(cmd, "target", lin_target, "target embedding file");
    cmd->add_option("--dict", lin_dict, "pivot word list (default: all shared words)");
    cmd->add_option("--freq", lin_freq, "word<TAB>count file for --top");
    cmd->add_option("--top", lin_top, "keep the n most frequent pivots")->check(CLI::PositiveNumber);
    cmd->add_option("--mode", lin_mode)->check(CLI::IsMember({"ls", "orthogonal"}));
    cmd->add_flag("--no-center", lin_no_center, "skip dictionary mean centering");
    cmd->add_flag("--no-normalize", lin_no_normalize, "skip unit length normalization");
    cmd->add_option("--out", lin_out, "map file")->required();
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet source = lin_source.Load();
        const EmbeddingSet target = lin_target.Load();
        const auto dict = MaybeTruncate(LoadOrBuildDictionary(lin_dict, source, target),
                                        lin_freq, lin_top);
        const LinearFit fit = FitLinear(source, target, dict, ParseMapMode(lin_mode),
                                        Preprocess{!lin_no_normalize, !lin_no_center});
        for (const auto& w : fit.warnings) err << "warning: " << w << '\n';
        SaveLinearMap(fit.map, lin_out);
        err << "fitted " << MapModeName(fit.map.mode) << " map on " << dict.size()
            << " pivots, residual " << fit.residual << '\n';
      };
    });
  }

  // train-nonlinear
  SetArg nl_source, nl_target;
  std::string nl_dict, nl_activation = "tanh", nl_out, nl_freq;
  std::size_t nl_layers = 1, nl_top = 0;
  TrainConfig nl_config;
  std::optional<std::uint64_t> nl_seed;
  {
    auto* cmd = app.add_subcommand("train-nonlinear", "Fit the fold-averaged MLP projection");
    AddSetOption(cmd, "source", nl_source, "source embedding file");
    AddSetOption(cmd, "target", nl_target, "target embedding file");
    cmd->add_option("--dict", nl_dict, "pivot word list (default: all shared words)");
    cmd->add_option("--freq", nl_freq, "word<TAB>count file for --top");
    cmd->add_option("--top", nl_top, "keep the n most frequent pivots")->check(CLI::PositiveNumber);
    cmd->add_option("--layers", nl_layers, "hidden layers")->check(CLI::IsMember({1, 5}));
    cmd->add_option("--activation", nl_activation)->check(CLI::IsMember({"tanh", "relu"}));
    cmd->add_option("--folds", nl_config.folds)->check(CLI::Range(2, 1000000));
    cmd->add_option("--minibatch", nl_config.minibatch)->check(CLI::PositiveNumber);
    cmd->add_option("--max-epochs", nl_config.max_epochs)->check(CLI::PositiveNumber);
    cmd->add_option("--patience", nl_config.patience)->check(CLI::PositiveNumber);
    cmd->add_option("--min-delta", nl_config.min_delta)->check(CLI::NonNegativeNumber);
    cmd->add_option("--step", nl_config.adam.step, "Adam step size")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", nl_config.threads, "folds trained concurrently")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", nl_seed);
    cmd->add_option("--out", nl_out, "ensemble file")->required();
    cmd->callback([&] {
      handler = [&] {
        nl_config.seed = ResolveSeed(nl_seed, err);
        const EmbeddingSet source = nl_source.Load();
        const EmbeddingSet target = nl_target.Load();
        const auto dict = MaybeTruncate(LoadOrBuildDictionary(nl_dict, source, target),
                                        nl_freq, nl_top);
        Architecture arch{nl_layers, 0, ParseActivation(nl_activation)};
        const MlpEnsemble ens = FitNonlinear(source, target, dict, arch, nl_config);
        err << arch.Label() << ": " << ens.networks.size() << " fold networks\n";
        for (std::size_t f = 0; f < ens.folds.size(); ++f) {
          const auto& s = ens.folds[f];
          err << "  fold " << f << ": train " << s.train_size << ", held-out "
              << s.heldout_size << ", best epoch " << s.best_epoch << " of "
              << s.heldout_history.size() << ", held-out MSE "
              << s.initial_heldout_mse << " -> "
              << s.heldout_history.at(s.best_epoch - 1) << '\n';
        }
        SaveEnsemble(ens, nl_out);
      };
    });
  }

  // apply-map
  std::string map_path;
  SetArg map_source, map_out;
  {
    auto* cmd = app.add_subcommand("apply-map", "Apply a linear map or MLP ensemble to every source word");
    cmd->add_option("--map", map_path, "map or ensemble file")->required();
    AddSetOption(cmd, "source", map_source, "source embedding file");
    cmd->add_option("--out", map_out.path, "mapped embedding file")->required();
    cmd->add_option("--out-format", map_out.format)->check(CLI::IsMember({"text", "binary"}));
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet source = map_source.Load();
        std::optional<EmbeddingSet> mapped;
        if (DetectModelKind(map_path) == ModelKind::kLinearMap) {
          mapped = ApplyLinear(LoadLinearMap(map_path), source);
        } else {
          mapped = ApplyNonlinear(LoadEnsemble(map_path), source);
          if (mapped->size() > 1) {
            const CollapseReport c = DetectCollapse(*mapped);
            err << "mean pairwise cosine " << c.mean_pairwise_cosine
                << (c.collapsed ? " (collapsed: vectors crowd into one region)" : "")
                << '\n';
          }
        }
        Save(*mapped, map_out.path, map_out.ResolvedFormat());
        err << "mapped " << mapped->size() << " words\n";
      };
    });
  }

  // concat
  SetArg cat_source, cat_target, cat_out;
  std::string cat_policy = "intersect";
  {
    auto* cmd = app.add_subcommand("concat", "Concatenate source and target vectors per word");
    AddSetOption(cmd, "source", cat_source, "source embedding file");
    AddSetOption(cmd, "target", cat_target, "target embedding file");
    cmd->add_option("--policy", cat_policy)->check(CLI::IsMember({"intersect", "zero_fill"}));
    cmd->add_option("--out", cat_out.path)->required();
    cmd->add_option("--out-format", cat_out.format)->check(CLI::IsMember({"text", "binary"}));
    cmd->callback([&] {
      handler = [&] {
        const EmbeddingSet joined = Concat(cat_source.Load(), cat_target.Load(),
                                           ParseMissingPolicy(cat_policy));
        Save(joined, cat_out.path, cat_out.ResolvedFormat());
        err << joined.size() << " words, dimension " << joined.dim() << '\n';
      };
    });
  }

  // train-sgns
  std::string sg_corpus, sg_reg_freq, sg_counts_out;
  SetArg sg_preinit, sg_out;
  SgnsConfig sg_config;
  std::optional<double> sg_lr, sg_reg_lambda;
  std::optional<std::uint64_t> sg_seed;
  bool sg_lowercase = false, sg_tiny = false;
  {
    auto* cmd = app.add_subcommand("train-sgns", "Train skip-gram negative-sampling embeddings");
    cmd->add_option("--corpus", sg_corpus, "text file or directory of text files")->required();
    cmd->add_flag("--tiny", sg_tiny, "small-corpus defaults: lr 0.05, min-count 2, 25 epochs");
    cmd->add_option("--dim", sg_config.dim)->check(CLI::PositiveNumber);
    cmd->add_option("--window", sg_config.window)->check(CLI::PositiveNumber);
    cmd->add_option("--negatives", sg_config.negatives)->check(CLI::PositiveNumber);
    cmd->add_option("--min-count", sg_config.min_count)->check(CLI::PositiveNumber);
    cmd->add_option("--epochs", sg_config.epochs)->check(CLI::NonNegativeNumber);
    cmd->add_option("--lr", sg_lr, "initial learning rate (0.025; 0.1 with --preinit)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--subsample", sg_config.subsample)->check(CLI::NonNegativeNumber);
    AddSetOption(cmd, "preinit", sg_preinit, "initialize from these vectors and retrain", false);
    cmd->add_flag("--preinit-context", sg_config.preinit_context,
                  "also initialize context vectors from --preinit");
    cmd->add_option("--reg-lambda", sg_reg_lambda, "pull preinit words toward their vectors")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--reg-freq", sg_reg_freq,
                    "word<TAB>count file defining significance (default: corpus counts)");
    cmd->add_flag("--lowercase", sg_lowercase);
    cmd->add_option("--seed", sg_seed);
    cmd->add_option("--threads", sg_config.threads,
                    "worker threads; more than 1 is not bitwise reproducible")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--counts-out", sg_counts_out, "write the vocabulary counts as word<TAB>count");
    cmd->add_option("--out", sg_out.path)->required();
    cmd->add_option("--out-format", sg_out.format)->check(CLI::IsMember({"text", "binary"}));
    cmd->callback([&, cmd] {
      handler = [&, cmd] {
        SgnsConfig cfg = sg_config;
        if (sg_tiny) {
          const SgnsConfig tiny = SgnsConfig::TinyCorpus();
          cfg.initial_lr = tiny.initial_lr;
          if (cmd->count("--min-count") == 0) cfg.min_count = tiny.min_count;
          if (cmd->count("--epochs") == 0) cfg.epochs = tiny.epochs;
        }
        if (!sg_preinit.path.empty()) cfg.initial_lr = kPreinitLearningRate;
        if (sg_lr) cfg.initial_lr = *sg_lr;
        cfg.seed = ResolveSeed(sg_seed, err);

        const Corpus corpus = Corpus::Load(sg_corpus, sg_lowercase);
        std::optional<EmbeddingSet> preinit;
        if (!sg_preinit.path.empty()) {
          preinit = sg_preinit.Load();
          if (cmd->count("--dim") == 0) cfg.dim = preinit->dim();
        }
        std::optional<RegularizationConfig> reg;
        if (sg_reg_lambda) {
          if (!preinit) throw UsageError("--reg-lambda requires --preinit");
          reg.emplace();
          reg->lambda = *sg_reg_lambda;
          reg->phi = SignificancePhi(sg_reg_freq.empty()
                                         ? BuildVocab(corpus, 1).Frequencies()
                                         : ReadFrequencyTable(sg_reg_freq));
        }
        err << "training on " << corpus.TokenCount() << " tokens, dim " << cfg.dim
            << ", lr " << cfg.initial_lr << ", " << cfg.epochs << " epochs\n";
        const SgnsModel model =
            TrainSgns(corpus, cfg, preinit ? &*preinit : nullptr, reg ? &*reg : nullptr);
        err << model.vocab.size() << " words";
        if (preinit) err << ", " << model.preinit_overlap << " preinitialized";
        err << '\n';
        Save(Export(model), sg_out.path, sg_out.ResolvedFormat());
        if (!sg_counts_out.empty()) {
          WriteFrequencyTable(model.vocab.Frequencies(), sg_counts_out);
        }
      };
    });
  }

  // run
  std::string run_spec;
  {
    auto* cmd = app.add_subcommand("run", "Run an adaptation described by a JSON spec");
    cmd->add_option("--spec", run_spec, "spec.json")->required();
    cmd->callback([&] {
      handler = [&] {
        const AdaptationSpec spec = AdaptationSpec::Load(run_spec);
        const RunResult result = Run(spec);
        err << MethodName(spec.method) << ": wrote " << spec.output.path.string()
            << " (" << result.adapted.size() << " x " << result.adapted.dim() << ")\n";
        if (result.report) {
          err << result.report->changed_count << " of " << result.report->vocab_size
              << " words changed their top-" << result.report->k << " neighbors\n";
        }
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : ExitCodeFor(ErrorCategory::kUsage);
  }

  try {
    if (handler) handler();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(ErrorCategory::kData);
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return ExitCodeFor(ErrorCategory::kNumerical);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(ErrorCategory::kData);
  }
}

}  // namespace embed_adapt
