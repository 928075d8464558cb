#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lexsimp/language_model.hpp"
#include "lexsimp/text.hpp"

#include <unistd.h>

namespace lexsimp::testing {

namespace {
std::atomic<int> g_counter{0};
}

TempDir::TempDir() {
  const auto base = fs::temp_directory_path();
  for (;;) {
    auto p = base / ("lexsimp-test-" + std::to_string(::getpid()) + "-" + std::to_string(g_counter++));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double synthetic_complexity(const std::vector<double>& f) {
  return 2.0 * f[0] + 1.5 * f[1] * f[1] - 1.0 * f[2] + 0.5 * std::sin(3.0 * f[3]) + 0.6 * f[4] * f[0];
}

SyntheticWords make_synthetic_words(std::size_t n, std::uint64_t seed, double noise) {
  std::vector<FeatureSpec> specs;
  for (int i = 1; i <= 5; ++i) {
    FeatureSpec s;
    s.name = "f" + std::to_string(i);
    s.group = FeatureGroup::kCustom;
    specs.push_back(s);
  }
  SyntheticWords out{FeatureSchema(std::move(specs)), {}, {}};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(5);
    for (auto& v : f) v = rng.uniform();
    out.latent.push_back(synthetic_complexity(f) + noise * rng.normal());
    out.features.push_back(std::move(f));
  }
  return out;
}

PairFeatures synthetic_pair(const SyntheticWords& words, std::size_t a, std::size_t b) {
  PairFeatures p;
  p.schema_hash = words.schema.hash();
  p.a = words.features[a];
  p.b = words.features[b];
  p.diff.resize(p.a.size());
  for (std::size_t i = 0; i < p.a.size(); ++i) p.diff[i] = p.a[i] - p.b[i];
  return p;
}

std::vector<LabeledPair> synthetic_pairs(const SyntheticWords& words, const std::vector<std::size_t>& pool,
                                         std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPair> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto a = pool[rng.below(pool.size())];
    const auto b = pool[rng.below(pool.size())];
    if (a == b) continue;
    out.push_back({synthetic_pair(words, a, b), words.latent[a] - words.latent[b]});
  }
  return out;
}

const std::vector<FixtureWord>& fixture_vocabulary() {
  static const std::vector<FixtureWord> words{
      {"use", 1.0},         {"utilize", 4.4},    {"employ", 3.0},      {"buy", 1.0},        {"purchase", 3.2},
      {"acquire", 3.9},     {"end", 1.1},        {"terminate", 4.3},   {"conclude", 3.6},   {"start", 1.2},
      {"commence", 4.8},    {"begin", 1.6},      {"initiate", 4.2},    {"home", 1.0},       {"residence", 3.7},
      {"dwelling", 4.1},    {"abode", 5.0},      {"help", 1.1},        {"assist", 3.1},     {"aid", 2.3},
      {"facilitate", 5.1},  {"car", 1.0},        {"automobile", 3.4},  {"vehicle", 2.6},    {"food", 1.0},
      {"nourishment", 4.5}, {"sustenance", 5.2}, {"walk", 1.0},        {"ambulate", 5.7},   {"stroll", 2.9},
      {"talk", 1.0},        {"converse", 4.3},   {"speak", 1.5},       {"discuss", 2.4},    {"big", 1.0},
      {"enormous", 3.3},    {"large", 1.4},      {"gigantic", 3.5},    {"small", 1.0},      {"diminutive", 5.3},
      {"little", 1.1},      {"tiny", 1.6},       {"cat", 1.0},         {"feline", 4.6},     {"kitty", 1.9},
      {"dog", 1.0},         {"canine", 4.4},     {"hound", 3.0},       {"show", 1.2},       {"demonstrate", 3.8},
      {"display", 2.5},     {"exhibit", 3.6},    {"the", 1.0},         {"man", 1.0},        {"saw", 1.0},
      {"in", 1.0},          {"park", 1.0},       {"a", 1.0},           {"we", 1.0},         {"will", 1.0},
      {"today", 1.0},       {"they", 1.0},       {"it", 1.0},          {"was", 1.0},        {"very", 1.0},
  };
  return words;
}

const std::vector<std::vector<const char*>>& fixture_synonyms() {
  static const std::vector<std::vector<const char*>> groups{
      {"use", "utilize", "employ"},
      {"buy", "purchase", "acquire"},
      {"end", "terminate", "conclude"},
      {"start", "commence", "begin", "initiate"},
      {"home", "residence", "dwelling", "abode"},
      {"help", "assist", "aid", "facilitate"},
      {"car", "automobile", "vehicle"},
      {"food", "nourishment", "sustenance"},
      {"walk", "ambulate", "stroll"},
      {"talk", "converse", "speak", "discuss"},
      {"big", "enormous", "large", "gigantic"},
      {"small", "diminutive", "little", "tiny"},
      {"cat", "feline", "kitty"},
      {"dog", "canine", "hound"},
      {"show", "demonstrate", "display", "exhibit"},
  };
  return groups;
}

double fixture_complexity(std::string_view word) {
  for (const auto& w : fixture_vocabulary()) {
    if (word == w.word) return w.complexity;
  }
  throw std::runtime_error("not a fixture word: " + std::string(word));
}

void write_resource_fixture(const fs::path& dir) {
  fs::create_directories(dir);
  Rng rng(20240521);
  const auto& vocab = fixture_vocabulary();
  const auto& groups = fixture_synonyms();

  // Lexicon: every content word except one per group, so lookups also miss.
  std::ostringstream lex;
  lex << "# word\tscore\n";
  for (const auto& g : groups) {
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      lex << g[i] << '\t' << text::format_double(fixture_complexity(g[i])) << '\n';
    }
  }
  write_file(dir / "lexicon.tsv", lex.str());

  // Corpus: simple words are far more frequent.
  std::ostringstream corpus;
  std::map<std::string, std::uint64_t> counts;
  const char* frames[][2] = {{"the man saw the", "in the park"}, {"we will", "it today"}, {"they", "a very"}};
  for (int s = 0; s < 600; ++s) {
    const auto& g = groups[rng.below(groups.size())];
    std::size_t pick = 0;
    for (;;) {
      pick = rng.below(g.size());
      const double keep = std::exp(-(fixture_complexity(g[pick]) - 1.0));
      if (rng.uniform() < keep) break;
    }
    const auto& frame = frames[rng.below(3)];
    const std::string sentence = std::string(frame[0]) + " " + g[pick] + " " + frame[1];
    corpus << sentence << '\n';
    for (const auto& t : text::split_whitespace(sentence)) ++counts[t];
  }
  write_file(dir / "corpus.txt", corpus.str());
  {
    std::istringstream in(corpus.str());
    LmOptions opt;
    opt.order = 3;
    NGramModel::train(read_corpus(in), opt).save(dir / "lm.bin");
  }

  std::ostringstream ngram;
  std::ostringstream simple;
  std::ostringstream normal;
  for (const auto& w : vocab) {
    const double c = w.complexity;
    ngram << w.word << '\t' << static_cast<std::uint64_t>(1e7 * std::exp(-2.0 * (c - 1.0)) + 10) << '\n';
    simple << w.word << '\t' << static_cast<std::uint64_t>(5e4 * std::exp(-1.5 * (c - 1.0))) << '\n';
    normal << w.word << '\t' << static_cast<std::uint64_t>(5e4 * std::exp(-0.7 * (c - 1.0))) << '\n';
  }
  write_file(dir / "ngram_freq.tsv", ngram.str());
  write_file(dir / "simple_freq.tsv", simple.str());
  write_file(dir / "normal_freq.tsv", normal.str());

  std::ostringstream emb;
  emb << vocab.size() << ' ' << kFixtureEmbeddingDim << '\n';
  for (const auto& w : vocab) {
    emb << w.word;
    // First component tracks complexity so the embedding features carry signal.
    emb << ' ' << text::format_double((w.complexity - 3.0) / 3.0);
    for (std::size_t d = 1; d < kFixtureEmbeddingDim; ++d) emb << ' ' << text::format_double(rng.uniform(-1, 1));
    emb << '\n';
  }
  write_file(dir / "embeddings.txt", emb.str());

  // Ranking instances: each group in each frame, gold rank by complexity.
  std::ostringstream ranking;
  for (const auto& g : groups) {
    for (const auto& frame : frames) {
      std::vector<std::pair<double, std::string>> order;
      for (const auto* w : g) order.emplace_back(fixture_complexity(w), w);
      std::sort(order.begin(), order.end());
      const auto left = text::split_whitespace(frame[0]);
      ranking << frame[0] << ' ' << g[0] << ' ' << frame[1] << '\t' << g[0] << '\t' << left.size();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto rank = std::find_if(order.begin(), order.end(), [&](const auto& p) { return p.second == g[i]; }) -
                          order.begin() + 1;
        ranking << '\t' << rank << ':' << g[i];
      }
      ranking << '\n';
    }
  }
  write_file(dir / "ranking.tsv", ranking.str());

  std::ostringstream rules;
  for (const auto& g : groups) {
    for (const auto* a : g) {
      for (const auto* b : g) {
        if (a == b) continue;
        const double d = fixture_complexity(a) - fixture_complexity(b);
        const int label = d > 1.0 ? 1 : d < -1.0 ? -1 : 0;
        rules << a << '\t' << b << '\t' << label << '\n';
      }
    }
  }
  write_file(dir / "rules_labeled.tsv", rules.str());
}

void write_ppdb_rules(const fs::path& path, std::size_t n, std::uint64_t seed, std::size_t malformed_every) {
  Rng rng(seed);
  const auto& groups = fixture_synonyms();
  const char* cats[] = {"[NN]", "[VB]", "[JJ]"};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < n; ++i) {
    if (malformed_every != 0 && (i + 1) % malformed_every == 0) {
      out << "[NN] ||| broken line without target\n";
      continue;
    }
    const auto& g = groups[rng.below(groups.size())];
    const auto* a = g[rng.below(g.size())];
    const auto* b = g[rng.below(g.size())];
    std::string src = a;
    std::string tgt = b;
    // Occasional phrases.
    if (rng.uniform() < 0.2) src = std::string("the ") + src;
    if (rng.uniform() < 0.2) tgt = tgt + " it";
    const double q = std::round(rng.uniform(2.0, 5.0) * 100.0) / 100.0;
    out << cats[rng.below(3)] << " ||| " << src << " ||| " << tgt << " ||| PPDB2.0Score=" << text::format_double(q)
        << " PPDB1.0Score=" << text::format_double(q / 2) << " ||| 0-0 ||| Equivalence\n";
  }
}

FixtureResources::FixtureResources(const fs::path& dir)
    : lexicon(load_lexicon(dir / "lexicon.tsv")),
      lm(NGramModel::load(dir / "lm.bin")),
      ngram(load_frequency_table(dir / "ngram_freq.tsv")),
      simple(load_frequency_table(dir / "simple_freq.tsv")),
      normal(load_frequency_table(dir / "normal_freq.tsv")),
      embeddings(load_embeddings(dir / "embeddings.txt")) {}

FeatureResources FixtureResources::view() const {
  FeatureResources r;
  r.lexicon = &lexicon;
  r.lemmatizer = &lemmatizer;
  r.lm = &lm;
  r.ngram_frequency = &ngram;
  r.simple_frequency = &simple;
  r.normal_frequency = &normal;
  r.embeddings = &embeddings;
  return r;
}

}  // namespace lexsimp::testing
