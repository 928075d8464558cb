#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "lexsimp/cwi.hpp"
#include "lexsimp/embeddings.hpp"
#include "lexsimp/features.hpp"
#include "lexsimp/frequency.hpp"
#include "lexsimp/language_model.hpp"
#include "lexsimp/lexicon.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/metrics.hpp"
#include "lexsimp/model.hpp"
#include "lexsimp/network.hpp"
#include "lexsimp/ppdb.hpp"
#include "lexsimp/ranking.hpp"
#include "lexsimp/syllables.hpp"
#include "lexsimp/text.hpp"

namespace fs = std::filesystem;

namespace lexsimp::cli {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kUsage;
    case ErrorCode::kMissingResource: return kMissingResource;
    case ErrorCode::kSchemaMismatch: return kSchemaMismatch;
    case ErrorCode::kParse: return kParseError;
    case ErrorCode::kNumeric: return kNumericError;
    case ErrorCode::kIo: return kFailure;
  }
  return kFailure;
}

namespace {

constexpr const char* kResourceDirEnv = "LEXSIMP_RESOURCE_DIR";

struct Globals {
  std::uint64_t seed = 1;
  std::string resource_dir;
  std::string log_level = "info";
  bool quiet = false;
};

struct ResourceOptions {
  std::string lexicon;
  std::string lm;
  std::string ngram_freq;
  std::string simple_freq;
  std::string normal_freq;
  std::string embeddings;
  std::string syllables;
  std::string features;
  bool no_lemmatizer = false;
};

void add_resource_options(CLI::App& sub, ResourceOptions& r, bool with_features) {
  sub.add_option("--lexicon", r.lexicon, "Word-complexity lexicon (word<TAB>score)");
  sub.add_option("--lm", r.lm, "Binary n-gram language model from train-lm");
  sub.add_option("--ngram-freq", r.ngram_freq, "N-gram frequency table (token<TAB>count)");
  sub.add_option("--simple-freq", r.simple_freq, "Simple-corpus frequency table");
  sub.add_option("--normal-freq", r.normal_freq, "Normal-corpus frequency table");
  sub.add_option("--embeddings", r.embeddings, "word2vec text file or binary embedding cache");
  sub.add_option("--syllables", r.syllables, "Syllable dictionary (word<TAB>count)");
  sub.add_flag("--no-lemmatizer", r.no_lemmatizer, "Disable lemma fallback for lexicon lookups");
  if (with_features) {
    sub.add_option("--features", r.features,
                   "Feature groups: comma list of surface,frequency,lexicon,context,embeddings; "
                   "'+g'/'-g' edit the task default");
  }
}

/// `given` as is (or under the resource directory when relative and not
/// found); otherwise `default_name` in the resource directory if present.
std::optional<fs::path> resolve(const std::string& given, std::string_view default_name, const Globals& g) {
  if (!given.empty()) {
    fs::path p(given);
    if (!fs::exists(p) && p.is_relative() && !g.resource_dir.empty() && fs::exists(fs::path(g.resource_dir) / p)) {
      return fs::path(g.resource_dir) / p;
    }
    return p;
  }
  if (!g.resource_dir.empty()) {
    const fs::path p = fs::path(g.resource_dir) / default_name;
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

fs::path require(const std::string& given, std::string_view flag, const Globals& g) {
  auto p = resolve(given, "", g);
  if (!p || given.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
  if (!fs::exists(*p)) throw Error(ErrorCode::kMissingResource, std::string(flag) + " file not found: " + p->string());
  return *p;
}

/// Everything the feature extractor may borrow, loaded on demand.
class Resources {
 public:
  void load(const ResourceOptions& opt, const Globals& g, const FeatureSchema& schema) {
    auto want = [&](FeatureGroup group) { return schema.group_enabled(group); };
    if (want(FeatureGroup::kLexicon)) {
      if (auto p = resolve(opt.lexicon, "lexicon.tsv", g)) lexicon_ = load_lexicon(*p);
    }
    if (want(FeatureGroup::kContext)) {
      if (auto p = resolve(opt.lm, "lm.bin", g)) lm_ = NGramModel::load(*p);
    }
    if (want(FeatureGroup::kFrequency)) {
      if (auto p = resolve(opt.ngram_freq, "ngram_freq.tsv", g)) ngram_ = load_frequency_table(*p);
      if (auto p = resolve(opt.simple_freq, "simple_freq.tsv", g)) simple_ = load_frequency_table(*p);
      if (auto p = resolve(opt.normal_freq, "normal_freq.tsv", g)) normal_ = load_frequency_table(*p);
    }
    if (want(FeatureGroup::kEmbeddings) && !embeddings_) load_embeddings_from(opt, g);
    if (want(FeatureGroup::kSurface)) {
      if (auto p = resolve(opt.syllables, "syllables.tsv", g)) {
        syllables_ = std::make_unique<DictionarySyllableCounter>(*p);
      }
    }
    use_lemmatizer_ = !opt.no_lemmatizer;
  }

  /// Embedding dimension, loading the store first if it is available.
  std::size_t embedding_dim(const ResourceOptions& opt, const Globals& g) {
    if (!embeddings_) load_embeddings_from(opt, g);
    return embeddings_ ? embeddings_->dim() : 300;
  }

  FeatureResources view() const {
    FeatureResources r;
    r.lexicon = lexicon_ ? &*lexicon_ : nullptr;
    r.lemmatizer = use_lemmatizer_ ? &lemmatizer_ : nullptr;
    r.lm = lm_ ? &*lm_ : nullptr;
    r.ngram_frequency = ngram_ ? &*ngram_ : nullptr;
    r.simple_frequency = simple_ ? &*simple_ : nullptr;
    r.normal_frequency = normal_ ? &*normal_ : nullptr;
    r.embeddings = embeddings_ ? &*embeddings_ : nullptr;
    r.syllables = syllables_.get();
    return r;
  }

 private:
  void load_embeddings_from(const ResourceOptions& opt, const Globals& g) {
    auto p = resolve(opt.embeddings, "embeddings.bin", g);
    if (!p) p = resolve("", "embeddings.txt", g);
    if (p) embeddings_ = lexsimp::load_embeddings(*p);
  }

  std::optional<Lexicon> lexicon_;
  SuffixLemmatizer lemmatizer_;
  bool use_lemmatizer_ = true;
  std::optional<NGramModel> lm_;
  std::optional<FrequencyTable> ngram_;
  std::optional<FrequencyTable> simple_;
  std::optional<FrequencyTable> normal_;
  std::optional<EmbeddingStore> embeddings_;
  std::unique_ptr<DictionarySyllableCounter> syllables_;
};

constexpr std::array<FeatureGroup, 5> kBuiltinGroups{FeatureGroup::kSurface, FeatureGroup::kFrequency,
                                                     FeatureGroup::kLexicon, FeatureGroup::kContext,
                                                     FeatureGroup::kEmbeddings};

std::set<FeatureGroup> parse_feature_groups(const std::string& spec, std::set<FeatureGroup> defaults) {
  if (text::trim(spec).empty()) return defaults;
  const auto items = text::split(spec, ',');
  const bool edits = !items.empty() && !text::trim(items[0]).empty() &&
                     (text::trim(items[0])[0] == '+' || text::trim(items[0])[0] == '-');
  std::set<FeatureGroup> groups = edits ? defaults : std::set<FeatureGroup>{};
  for (auto item : items) {
    item = text::trim(item);
    if (item.empty()) continue;
    bool add = true;
    if (item[0] == '+' || item[0] == '-') {
      add = item[0] == '+';
      item.remove_prefix(1);
    }
    if (item == "all") {
      for (auto g : kBuiltinGroups) add ? (void)groups.insert(g) : (void)groups.erase(g);
      continue;
    }
    const auto g = parse_feature_group(item);
    if (!g || *g == FeatureGroup::kCustom) {
      throw Error(ErrorCode::kInvalidArgument, "unknown feature group '" + std::string(item) + "'");
    }
    add ? (void)groups.insert(*g) : (void)groups.erase(*g);
  }
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "no feature groups enabled");
  return groups;
}

std::set<FeatureGroup> default_groups(const std::string& task) {
  std::set<FeatureGroup> g(kBuiltinGroups.begin(), kBuiltinGroups.end());
  if (task == "ppdb") g.erase(FeatureGroup::kContext);
  return g;
}

FeatureSchema build_schema(std::size_t dim, const std::set<FeatureGroup>& groups) {
  FeatureSchema schema = FeatureSchema::standard(dim);
  for (auto g : kBuiltinGroups) schema.set_group_enabled(g, groups.count(g) > 0);
  return schema;
}

/// Writes to `--out` when given, otherwise to the result stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::kIo, "cannot open output: " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw Error(ErrorCode::kIo, "failed to write output");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void emit_report(const metrics::EvalReport& report, const std::string& format, std::ostream& out) {
  if (format == "jsonl") {
    out << report.to_jsonl();
  } else {
    out << report.to_text();
  }
}

// ---- build-lexicon ---------------------------------------------------------

struct BuildLexiconCmd {
  std::string ratings;
  std::string out;
  std::string policy = "strict";
  int threshold = 2;
  bool agreement = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("build-lexicon", "Aggregate annotator ratings into a word-complexity lexicon");
    sub->add_option("--ratings", ratings, "word<TAB>r1<TAB>r2... ratings file")->required();
    sub->add_option("--out", out, "Output lexicon (default: stdout)");
    sub->add_option("--outlier-policy", policy, "strict: drop when the gap exceeds the threshold; inclusive: when it "
                                                "reaches it")
        ->check(CLI::IsMember({"strict", "inclusive"}));
    sub->add_option("--outlier-threshold", threshold, "Gap to the mean of the other ratings")->check(CLI::Range(0, 5));
    sub->add_flag("--agreement", agreement, "Also print mean inter-annotator Pearson correlation");
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream& err) {
    (void)err;
    const auto records = load_ratings(require(ratings, "--ratings", g));
    OutlierPolicy p = policy == "inclusive" ? OutlierPolicy::inclusive_ties() : OutlierPolicy::strict();
    p.threshold = threshold;
    const auto result = aggregate_ratings(records, p);
    Sink sink(out, out_stream);
    write_lexicon(*sink, result.lexicon);
    sink.close();
    log().info("{} words, {} of {} ratings discarded, {} word(s) kept their plain mean", result.lexicon.size(),
               result.ratings_discarded, result.ratings_total, result.flagged.size());
    if (agreement) {
      const double a = mean_interannotator_agreement(records, &p);
      if (out.empty()) {
        log().info("mean inter-annotator agreement {:.4f}", a);
      } else {
        out_stream << "agreement\t" << text::format_double(a) << '\n';
      }
    }
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

// ---- train-lm ---------------------------------------------------------------

struct TrainLmCmd {
  std::string corpus;
  std::string out;
  int order = 5;
  std::string smoothing = "auto";
  double alpha = 1.0;
  bool keep_case = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("train-lm", "Train an n-gram language model on a sentence-per-line corpus");
    sub->add_option("--corpus", corpus, "Tokenized corpus, one sentence per line")->required();
    sub->add_option("--out", out, "Output model file")->required();
    sub->add_option("--order", order, "N-gram order")->check(CLI::Range(1, 10));
    sub->add_option("--smoothing", smoothing, "auto, kneser-ney or additive")
        ->check(CLI::IsMember({"auto", "kneser-ney", "additive"}));
    sub->add_option("--alpha", alpha, "Add-alpha constant");
    sub->add_flag("--keep-case", keep_case, "Do not lowercase tokens");
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    const auto sentences = load_corpus(require(corpus, "--corpus", g));
    LmOptions opt;
    opt.order = order;
    opt.alpha = alpha;
    opt.lowercase = !keep_case;
    opt.smoothing = smoothing == "kneser-ney" ? Smoothing::kKneserNey
                    : smoothing == "additive" ? Smoothing::kAdditive
                                              : Smoothing::kAuto;
    const auto lm = NGramModel::train(sentences, opt);
    lm.save(fs::path(out));
    out_stream << "order\t" << lm.order() << '\n'
               << "smoothing\t" << (lm.smoothing() == Smoothing::kKneserNey ? "kneser-ney" : "additive") << '\n'
               << "vocabulary\t" << lm.vocab_size() << '\n'
               << "sentences\t" << sentences.size() << '\n';
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

// ---- train --------------------------------------------------------------------

struct TrainCmd {
  std::string task = "rank";
  std::string data;
  std::string out;
  std::string loss_trace;
  std::optional<double> lr;
  int epochs = 100;
  double dropout = 0.2;
  int batch = 32;
  int k = 10;
  double gamma = 0.2;
  bool no_binning = false;
  ResourceOptions res;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "Train the pairwise readability ranker");
    sub->add_option("--task", task, "rank (substitution ranking) or ppdb (paraphrase rules)")
        ->check(CLI::IsMember({"rank", "ppdb", "cwi"}));
    sub->add_option("--data", data, "rank: ranking dataset; ppdb: source<TAB>target<TAB>label")->required();
    sub->add_option("--out", out, "Output model file")->required();
    sub->add_option("--loss-trace", loss_trace, "Write epoch<TAB>loss lines here");
    sub->add_option("--lr", lr, "Learning rate (default 0.0005 for rank, 0.001 for ppdb)");
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--dropout", dropout, "Dropout rate on hidden units");
    sub->add_option("--batch-size", batch, "Mini-batch size");
    sub->add_option("--bins", k, "Gaussian bins per feature");
    sub->add_option("--gamma", gamma, "Bin width fraction for sigma");
    sub->add_flag("--no-binning", no_binning, "Feed raw feature values");
    add_resource_options(*sub, res, true);
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    if (task == "cwi") {
      throw Error(ErrorCode::kInvalidArgument, "CWI classifiers are trained by the cwi subcommand");
    }
    TrainConfig cfg = task == "ppdb" ? TrainConfig::ppdb() : TrainConfig::ranking();
    if (lr) cfg.learning_rate = *lr;
    cfg.epochs = epochs;
    cfg.dropout = dropout;
    cfg.batch_size = batch;
    cfg.seed = g.seed;
    cfg.k = k;
    cfg.gamma = gamma;
    cfg.use_binning = !no_binning;
    cfg.validate();

    const auto data_path = require(data, "--data", g);
    Resources resources;
    const auto groups = parse_feature_groups(res.features, default_groups(task));
    const std::size_t dim = groups.count(FeatureGroup::kEmbeddings) ? resources.embedding_dim(res, g) : 300;
    const FeatureSchema schema = build_schema(dim, groups);
    resources.load(res, g, schema);
    const FeatureExtractor extractor(schema, resources.view());

    std::vector<LabeledPair> pairs;
    if (task == "rank") {
      pairs = ranking_training_set(extractor, load_ranking_instances(data_path));
    } else {
      pairs = ppdb_training_set(extractor, load_labeled_rules(data_path));
    }
    log().info("training on {} pairs (lr {}, {} epochs)", pairs.size(), cfg.learning_rate, cfg.epochs);
    const auto result = train_nrr(schema, pairs, cfg);
    result.model.save(fs::path(out));
    if (!loss_trace.empty()) {
      std::ofstream trace(loss_trace, std::ios::binary | std::ios::trunc);
      if (!trace) throw Error(ErrorCode::kIo, "cannot open loss trace: " + loss_trace);
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        trace << e + 1 << '\t' << text::format_double(result.epoch_loss[e]) << '\n';
      }
    }
    out_stream << "pairs\t" << pairs.size() << '\n'
               << "input_dim\t" << result.model.vectorizer().input_dim() << '\n'
               << "final_loss\t" << text::format_double(result.epoch_loss.back()) << '\n';
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

/// Model plus an extractor over freshly loaded resources.
struct LoadedModel {
  NRRModel model;
  Resources resources;
  std::unique_ptr<FeatureExtractor> extractor;
};

std::unique_ptr<LoadedModel> load_model(const std::string& path, const ResourceOptions& res, const Globals& g) {
  auto model = NRRModel::load(require(path, "--model", g));
  auto lm = std::make_unique<LoadedModel>(LoadedModel{std::move(model), Resources{}, nullptr});
  lm->resources.load(res, g, lm->model.schema());
  lm->extractor = std::make_unique<FeatureExtractor>(lm->model.schema(), lm->resources.view());
  return lm;
}

// ---- rank ---------------------------------------------------------------------

struct RankCmd {
  std::string model;
  std::string data;
  std::string out;
  bool scores = false;
  ResourceOptions res;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("rank", "Rank substitution candidates by simplicity");
    sub->add_option("--model", model, "Trained model")->required();
    sub->add_option("--data", data, "Ranking instances (gold ranks are ignored)")->required();
    sub->add_option("--out", out, "Output file (default: stdout)");
    sub->add_flag("--scores", scores, "Append each candidate's summed pairwise score");
    add_resource_options(*sub, res, false);
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    const auto lm = load_model(model, res, g);
    const auto instances = load_ranking_instances(require(data, "--data", g));
    Sink sink(out, out_stream);
    for (const auto& inst : instances) {
      const auto ranked = rank_candidates(lm->model, *lm->extractor, inst);
      *sink << text::join(inst.sentence, " ") << '\t' << (inst.sentence.empty() ? "" : inst.sentence[inst.target])
            << '\t' << inst.target;
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        *sink << '\t' << r + 1 << ':' << ranked[r].text;
        if (scores) *sink << '=' << text::format_double(ranked[r].score);
      }
      *sink << '\n';
    }
    sink.close();
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

// ---- classify-ppdb / build-simpleppdb -----------------------------------------

struct ClassifyPpdbCmd {
  std::string model;
  std::string rules;
  std::string out;
  std::string columns = "0,1,2,3";
  ResourceOptions res;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("classify-ppdb", "Score and classify paraphrase rules (single pass, no checkpoint)");
    sub->add_option("--model", model, "Trained model")->required();
    sub->add_option("--rules", rules, "PPDB rules: category ||| source ||| target ||| quality")->required();
    sub->add_option("--out", out, "Output TSV (default: stdout)");
    sub->add_option("--columns", columns, "Column map category,source,target,quality (-1: no quality)");
    add_resource_options(*sub, res, false);
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    const auto lm = load_model(model, res, g);
    SimplePpdbOptions opt;
    opt.columns = PpdbColumns::parse(columns);
    std::ifstream in(require(rules, "--rules", g), std::ios::binary);
    Sink sink(out, out_stream);
    const auto stats = build_simpleppdb(nrr_rule_scorer(lm->model, *lm->extractor), in, *sink, opt);
    sink.close();
    log().info("{} rule(s) scored, {} malformed", stats.scored, stats.malformed);
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

struct BuildSimplePpdbCmd {
  std::string model;
  std::string rules;
  std::string out;
  std::string checkpoint;
  std::string columns = "0,1,2,3";
  std::size_t jobs = 1;
  std::size_t chunk = 2048;
  bool resume = false;
  std::optional<std::uint64_t> stop_after;
  ResourceOptions res;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("build-simpleppdb", "Score a full PPDB file with checkpointing and workers");
    sub->add_option("--model", model, "Trained model")->required();
    sub->add_option("--rules", rules, "PPDB rules: category ||| source ||| target ||| quality")->required();
    sub->add_option("--out", out, "Output TSV")->required();
    sub->add_option("--checkpoint", checkpoint, "Checkpoint file (default: <out>.ckpt)");
    sub->add_option("--columns", columns, "Column map category,source,target,quality (-1: no quality)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
    sub->add_option("--chunk-size", chunk, "Rules per chunk / checkpoint interval")->check(CLI::Range(1, 1 << 24));
    sub->add_flag("--resume", resume, "Continue from the checkpoint if present");
    sub->add_option("--stop-after", stop_after, "Stop after this many input lines");
    add_resource_options(*sub, res, false);
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    const auto lm = load_model(model, res, g);
    SimplePpdbOptions opt;
    opt.jobs = jobs;
    opt.chunk_size = chunk;
    opt.columns = PpdbColumns::parse(columns);
    opt.checkpoint = checkpoint.empty() ? fs::path(out + ".ckpt") : fs::path(checkpoint);
    opt.resume = resume;
    opt.stop_after = stop_after;
    const auto stats =
        build_simpleppdb(nrr_rule_scorer(lm->model, *lm->extractor), require(rules, "--rules", g), fs::path(out), opt);
    out_stream << "lines\t" << stats.lines << '\n'
               << "scored\t" << stats.scored << '\n'
               << "malformed\t" << stats.malformed << '\n'
               << "simplifying\t" << stats.count(RuleClass::kSimplifying) << '\n'
               << "no-difference\t" << stats.count(RuleClass::kNoDifference) << '\n'
               << "complicating\t" << stats.count(RuleClass::kComplicating) << '\n'
               << "completed\t" << (stats.completed ? 1 : 0) << '\n';
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

// ---- generate -----------------------------------------------------------------

struct GenerateCmd {
  std::string simpleppdb;
  std::string target;
  std::string pos;
  std::string targets;
  std::string out;
  double word_quality = 3.5;
  double phrase_quality = 4.0;
  std::size_t top = 0;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "Generate simpler substitutions from a scored paraphrase resource");
    sub->add_option("--simpleppdb", simpleppdb, "Output of build-simpleppdb")->required();
    sub->add_option("--target", target, "Word or phrase to simplify");
    sub->add_option("--pos", pos, "Syntactic category of --target, e.g. NN or [NN]");
    sub->add_option("--targets", targets, "File of target<TAB>category lines");
    sub->add_option("--out", out, "Output file (default: stdout)");
    sub->add_option("--word-quality", word_quality, "Minimum quality for single-word targets");
    sub->add_option("--phrase-quality", phrase_quality, "Minimum quality for phrase targets");
    sub->add_option("--top", top, "Keep at most this many candidates (0 = all)");
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    if (target.empty() == targets.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "give exactly one of --target and --targets");
    }
    const SubstitutionIndex index(load_simpleppdb(require(simpleppdb, "--simpleppdb", g)));
    const GenerationConfig cfg{word_quality, phrase_quality};
    Sink sink(out, out_stream);
    auto emit = [&](const std::string& t, const std::string& cat, bool batch) {
      auto subs = generate_substitutions(t, cat, index, cfg);
      if (top > 0 && subs.size() > top) subs.resize(top);
      for (const auto& s : subs) {
        if (batch) *sink << t << '\t';
        *sink << s.text << '\t' << text::format_double(s.yhat) << '\t' << text::format_double(s.quality) << '\n';
      }
    };
    if (!target.empty()) {
      emit(target, pos, false);
    } else {
      std::ifstream in(require(targets, "--targets", g), std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, '\t');
        emit(std::string(text::trim(f[0])), f.size() > 1 ? std::string(text::trim(f[1])) : std::string(), true);
      }
    }
    sink.close();
    return kOk;
  }
  CLI::App* sub_ = nullptr;
};

// ---- cwi ------------------------------------------------------------------------

struct CwiOptions {
  std::string train;
  std::string test;
  std::string method = "centroid";
  std::string format = "auto";
  bool with_wc = false;
  std::string senses;
  std::string cwi_features;
  std::string predictions;

  void attach(CLI::App& sub, ResourceOptions& res) {
    sub.add_option("--train", train, "Training instances (SemEval-2016 or CWIG3G2 TSV)");
    sub.add_option("--test", test, "Test instances");
    sub.add_option("--method", method, "wc-only (lexicon threshold) or centroid (nearest centroid)")
        ->check(CLI::IsMember({"wc-only", "centroid"}));
    sub.add_option("--cwi-format", format, "auto, semeval2016 or cwig3g2")
        ->check(CLI::IsMember({"auto", "semeval2016", "cwig3g2"}));
    sub.add_flag("--with-wc", with_wc, "Add lexicon presence and score to the centroid features");
    sub.add_option("--senses", senses, "Sense inventory (word<TAB>senses)");
    sub.add_option("--cwi-features", cwi_features,
                   "Centroid features: comma list of length,senses,pos,cosine,frequency "
                   "(default: every one whose resource is given)");
    sub.add_option("--predictions", predictions, "Write target<TAB>prediction lines here");
    add_resource_options(sub, res, false);
  }

  int run(const Globals& g, const ResourceOptions& res, const std::string& report_format, std::ostream& out) {
    const CwiFormat fmt = format == "semeval2016" ? CwiFormat::kSemEval2016
                          : format == "cwig3g2"   ? CwiFormat::kCwig3g2
                                                  : CwiFormat::kAuto;
    const auto train_set = load_cwi(require(train, "--train", g), fmt);
    const auto test_set = load_cwi(require(test, "--test", g), fmt);
    const SuffixLemmatizer lemmatizer;
    const Lemmatizer* lem = res.no_lemmatizer ? nullptr : &lemmatizer;
    std::optional<Lexicon> lexicon;
    if (method == "wc-only" || with_wc) {
      const auto p = resolve(res.lexicon, "lexicon.tsv", g);
      if (!p) throw Error(ErrorCode::kMissingResource, "this CWI method needs --lexicon");
      lexicon = load_lexicon(*p);
    }
    std::vector<bool> predicted;
    if (method == "wc-only") {
      const auto clf = cwi_wc_only(train_set, *lexicon, lem);
      log().info("learned lexicon threshold {}", clf.threshold);
      for (const auto& inst : test_set) predicted.push_back(clf.predict(inst, *lexicon, lem));
    } else {
      std::optional<FrequencyTable> ngram;
      std::optional<EmbeddingStore> emb;
      std::optional<SenseInventory> inv;
      if (auto p = resolve(res.ngram_freq, "ngram_freq.tsv", g)) ngram = load_frequency_table(*p);
      if (auto p = resolve(res.embeddings, "embeddings.bin", g)) emb = lexsimp::load_embeddings(*p);
      if (auto p = resolve(senses, "senses.tsv", g)) inv = load_sense_inventory(*p);
      CwiFeatureConfig cfg;
      if (cwi_features.empty()) {
        cfg.senses = inv.has_value();
        cfg.cosine = emb.has_value();
        cfg.frequency = ngram.has_value();
      } else {
        cfg = CwiFeatureConfig{false, false, false, false, false, false};
        for (auto f : text::split(cwi_features, ',')) {
          f = text::trim(f);
          if (f == "length") cfg.length = true;
          else if (f == "senses") cfg.senses = true;
          else if (f == "pos") cfg.pos = true;
          else if (f == "cosine") cfg.cosine = true;
          else if (f == "frequency") cfg.frequency = true;
          else throw Error(ErrorCode::kInvalidArgument, "unknown CWI feature '" + std::string(f) + "'");
        }
      }
      cfg.wc = with_wc;
      CwiResources cr;
      cr.ngram_frequency = ngram ? &*ngram : nullptr;
      cr.embeddings = emb ? &*emb : nullptr;
      cr.senses = inv ? &*inv : nullptr;
      cr.lexicon = lexicon ? &*lexicon : nullptr;
      cr.lemmatizer = lem;
      const auto clf = cwi_nearest_centroid(train_set, cfg, cr);
      for (const auto& inst : test_set) predicted.push_back(clf.predict(inst));
    }
    if (!predictions.empty()) {
      std::ofstream p(predictions, std::ios::binary | std::ios::trunc);
      if (!p) throw Error(ErrorCode::kIo, "cannot open predictions file: " + predictions);
      for (std::size_t i = 0; i < test_set.size(); ++i) {
        p << test_set[i].target() << '\t' << (predicted[i] ? 1 : 0) << '\n';
      }
    }
    std::vector<bool> gold;
    for (const auto& inst : test_set) gold.push_back(inst.complex);
    auto report = cwi_report(predicted, gold);
    report.task = "cwi-" + method + (with_wc ? "+wc" : "");
    emit_report(report, report_format, out);
    return kOk;
  }
};

struct CwiCmd {
  CwiOptions cwi;
  ResourceOptions res;
  std::string format = "text";

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("cwi", "Train a complex word identifier and evaluate it on a test set");
    cwi.attach(*sub, res);
    sub->add_option("--format", format, "Report format: text or jsonl")->check(CLI::IsMember({"text", "jsonl"}));
    sub_ = sub;
  }
  int run(const Globals& g, std::ostream& out, std::ostream&) {
    require(cwi.train, "--train", g);
    require(cwi.test, "--test", g);
    return cwi.run(g, res, format, out);
  }
  CLI::App* sub_ = nullptr;
};

// ---- eval -----------------------------------------------------------------------

struct EvalCmd {
  std::string task = "rank";
  std::string model;
  std::string baseline;
  std::string data;
  std::string simpleppdb;
  std::string judgments;
  std::string format = "text";
  std::string out;
  std::size_t resamples = 10000;
  double word_quality = 3.5;
  double phrase_quality = 4.0;
  CwiOptions cwi;
  ResourceOptions res;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("eval", "Evaluate a model or resource");
    sub->add_option("--task", task, "rank, ppdb, generate or cwi")
        ->check(CLI::IsMember({"rank", "ppdb", "generate", "cwi"}));
    sub->add_option("--model", model, "Trained model (rank, ppdb)");
    sub->add_option("--baseline", baseline, "Second model for a paired bootstrap test on P@1 (rank)");
    sub->add_option("--resamples", resamples, "Bootstrap resamples");
    sub->add_option("--data", data, "rank: ranking dataset; ppdb: labelled rules");
    sub->add_option("--simpleppdb", simpleppdb, "Scored rules (generate)");
    sub->add_option("--judgments", judgments, "generate: target<TAB>category<TAB>candidate<TAB>0|1");
    sub->add_option("--word-quality", word_quality, "Minimum quality for single-word targets (generate)");
    sub->add_option("--phrase-quality", phrase_quality, "Minimum quality for phrase targets (generate)");
    sub->add_option("--format", format, "text or jsonl")->check(CLI::IsMember({"text", "jsonl"}));
    sub->add_option("--out", out, "Report file (default: stdout)");
    cwi.attach(*sub, res);
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out_stream, std::ostream&) {
    Sink sink(out, out_stream);
    if (task == "cwi") {
      cwi.run(g, res, format, *sink);
    } else if (task == "rank") {
      eval_rank(g, *sink);
    } else if (task == "ppdb") {
      eval_ppdb(g, *sink);
    } else {
      eval_generate(g, *sink);
    }
    sink.close();
    return kOk;
  }

 private:
  void eval_rank(const Globals& g, std::ostream& os) {
    const auto instances = load_ranking_instances(require(data, "--data", g));
    const auto lm = load_model(model, res, g);
    auto ev = evaluate_ranking(lm->model, *lm->extractor, instances);
    if (!baseline.empty()) {
      const auto base = load_model(baseline, res, g);
      const auto base_ev = evaluate_ranking(base->model, *base->extractor, instances);
      auto hits = [&](const std::vector<std::vector<RankedCandidate>>& rankings) {
        std::vector<double> h;
        for (std::size_t i = 0; i < instances.size(); ++i) {
          const auto gold = instances[i].gold();
          const int best = *std::min_element(gold.ranks.begin(), gold.ranks.end());
          h.push_back(gold.ranks[rankings[i].front().index] == best ? 1.0 : 0.0);
        }
        return h;
      };
      const auto ha = hits(ev.rankings);
      const auto hb = hits(base_ev.rankings);
      auto mean_of = [](const std::vector<double>& v) {
        return [&v](std::span<const std::size_t> idx) {
          double s = 0.0;
          for (auto i : idx) s += v[i];
          return s / static_cast<double>(idx.size());
        };
      };
      ev.report.add("baseline_p_at_1", base_ev.report.at("p_at_1"));
      ev.report.add("bootstrap_p",
                    metrics::paired_bootstrap(instances.size(), mean_of(ha), mean_of(hb), resamples, g.seed));
    }
    emit_report(ev.report, format, os);
  }

  void eval_ppdb(const Globals& g, std::ostream& os) {
    const auto rules = load_labeled_rules(require(data, "--data", g));
    const auto lm = load_model(model, res, g);
    const auto scorer = nrr_rule_scorer(lm->model, *lm->extractor);
    std::vector<int> predicted;
    std::vector<int> gold;
    for (const auto& r : rules) {
      predicted.push_back(static_cast<int>(classify_score(scorer({"", r.source, r.target, std::nullopt}))));
      gold.push_back(static_cast<int>(r.label));
    }
    const auto cr = metrics::class_precisions(predicted, gold, {-1, 0, 1}, 1);
    metrics::EvalReport report;
    report.task = "ppdb";
    report.instances = rules.size();
    report.add("accuracy", cr.accuracy);
    report.add("p_simplifying", cr.per_class.at(1).precision);
    report.add("p_complicating", cr.per_class.at(-1).precision);
    report.add("p_no_difference", cr.per_class.at(0).precision);
    report.add("f1_simplifying", cr.f1);
    for (const auto& [label, s] : cr.per_class) {
      report.breakdowns.push_back({std::string(to_string(static_cast<RuleClass>(label))),
                                   {{"precision", s.precision},
                                    {"recall", s.recall},
                                    {"predicted", static_cast<double>(s.predicted)},
                                    {"actual", static_cast<double>(s.actual)},
                                    {"precision_defined", s.precision_defined ? 1.0 : 0.0}}});
    }
    emit_report(report, format, os);
  }

  void eval_generate(const Globals& g, std::ostream& os) {
    const SubstitutionIndex index(load_simpleppdb(require(simpleppdb, "--simpleppdb", g)));
    std::ifstream in(require(judgments, "--judgments", g), std::ios::binary);
    std::vector<std::pair<std::string, std::string>> targets;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> good;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      const auto f = text::split(line, '\t');
      long long rel = 0;
      if (f.size() != 4 || !text::parse_int(text::trim(f[3]), rel) || (rel != 0 && rel != 1)) {
        throw Error(ErrorCode::kParse, judgments + ": expected target, category, candidate, 0|1, line " +
                                           std::to_string(line_no));
      }
      std::pair<std::string, std::string> key{std::string(text::trim(f[0])), std::string(text::trim(f[1]))};
      if (!good.count(key)) targets.push_back(key);
      auto& set = good[key];
      if (rel == 1) set.insert(text::to_lower(text::trim(f[2])));
    }
    std::vector<std::vector<bool>> lists;
    for (const auto& key : targets) {
      const auto subs = generate_substitutions(key.first, key.second, index, {word_quality, phrase_quality});
      std::vector<bool> rel;
      for (const auto& s : subs) rel.push_back(good[key].count(text::to_lower(s.text)) > 0);
      lists.push_back(std::move(rel));
    }
    const auto map = metrics::mean_average_precision(lists);
    metrics::EvalReport report;
    report.task = "generate";
    report.instances = targets.size();
    report.add("map", map.value);
    report.add("p_at_1", metrics::precision_at_1(lists));
    report.add("targets_with_candidates", static_cast<double>(map.included));
    report.add("targets_without_candidates", static_cast<double>(map.excluded));
    emit_report(report, format, os);
  }

 public:
  CLI::App* sub_ = nullptr;
};

// ---- gradcheck ------------------------------------------------------------------

struct GradcheckCmd {
  std::size_t draws = 100;
  double tolerance = 1e-4;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("gradcheck", "Compare backprop gradients with central finite differences");
    sub->add_option("--draws", draws, "Random model/batch draws")->check(CLI::Range(1, 100000));
    sub->add_option("--tolerance", tolerance, "Maximum relative error for success");
    sub_ = sub;
  }

  int run(const Globals& g, std::ostream& out, std::ostream&) {
    const auto r = random_gradient_check(g.seed, draws);
    out << "draws\t" << r.draws << '\n'
        << "max_relative_error\t" << text::format_double(r.worst.max_relative_error) << '\n'
        << "worst_analytic\t" << text::format_double(r.worst.analytic) << '\n'
        << "worst_numeric\t" << text::format_double(r.worst.numeric) << '\n';
    const bool ok = r.worst.max_relative_error < tolerance;
    out << "status\t" << (ok ? "ok" : "fail") << '\n';
    return ok ? kOk : kNumericError;
  }
  CLI::App* sub_ = nullptr;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lexical simplification toolkit: word-complexity lexicon and pairwise neural readability ranker",
               "lexsimp"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key/value file; [subcommand] tables, flags override it");
  Globals g;
  if (const char* env = std::getenv(kResourceDirEnv)) g.resource_dir = env;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--resource-dir", g.resource_dir,
                 std::string("Directory searched for resources (default: $") + kResourceDirEnv + ")");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_flag("-q,--quiet", g.quiet, "Only log warnings and errors");

  BuildLexiconCmd build_lexicon;
  TrainLmCmd train_lm;
  TrainCmd train;
  RankCmd rank;
  ClassifyPpdbCmd classify_ppdb;
  BuildSimplePpdbCmd build_simpleppdb_cmd;
  GenerateCmd generate;
  CwiCmd cwi;
  EvalCmd eval;
  GradcheckCmd gradcheck;
  build_lexicon.attach(app);
  train_lm.attach(app);
  train.attach(app);
  rank.attach(app);
  classify_ppdb.attach(app);
  build_simpleppdb_cmd.attach(app);
  generate.attach(app);
  cwi.attach(app);
  eval.attach(app);
  gradcheck.attach(app);

  if (args.empty()) {
    err << app.help();
    return kUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return kUsage;
  }

  log().set_level(g.quiet ? spdlog::level::warn : spdlog::level::from_str(g.log_level));
  try {
    if (build_lexicon.sub_->parsed()) return build_lexicon.run(g, out, err);
    if (train_lm.sub_->parsed()) return train_lm.run(g, out, err);
    if (train.sub_->parsed()) return train.run(g, out, err);
    if (rank.sub_->parsed()) return rank.run(g, out, err);
    if (classify_ppdb.sub_->parsed()) return classify_ppdb.run(g, out, err);
    if (build_simpleppdb_cmd.sub_->parsed()) return build_simpleppdb_cmd.run(g, out, err);
    if (generate.sub_->parsed()) return generate.run(g, out, err);
    if (cwi.sub_->parsed()) return cwi.run(g, out, err);
    if (eval.sub_->parsed()) return eval.run(g, out, err);
    if (gradcheck.sub_->parsed()) return gradcheck.run(g, out, err);
    err << app.help();
    return kUsage;
  } catch (const Error& e) {
    err << "error[" << to_string(e.code()) << "]: " << one_line(e.what()) << '\n';
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error[io]: " << one_line(e.what()) << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error[internal]: " << one_line(e.what()) << '\n';
    return kFailure;
  }
}

}  // namespace lexsimp::cli
