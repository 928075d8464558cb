#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lexsimp/embeddings.hpp"
#include "lexsimp/features.hpp"
#include "lexsimp/frequency.hpp"
#include "lexsimp/language_model.hpp"
#include "lexsimp/lexicon.hpp"
#include "lexsimp/model.hpp"
#include "lexsimp/random.hpp"

namespace lexsimp::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// Words described by five scalar features in [0, 1] with a latent
/// complexity that is a fixed nonlinear function of them plus noise.
struct SyntheticWords {
  FeatureSchema schema;
  std::vector<std::vector<double>> features;
  std::vector<double> latent;
};

double synthetic_complexity(const std::vector<double>& f);
SyntheticWords make_synthetic_words(std::size_t n, std::uint64_t seed, double noise = 0.05);
PairFeatures synthetic_pair(const SyntheticWords& words, std::size_t a, std::size_t b);
/// `count` random ordered pairs drawn from `pool`, labelled latent(a) - latent(b).
std::vector<LabeledPair> synthetic_pairs(const SyntheticWords& words, const std::vector<std::size_t>& pool,
                                         std::size_t count, std::uint64_t seed);

/// Vocabulary with a hand-assigned complexity on the 1..6 scale.
struct FixtureWord {
  const char* word;
  double complexity;
};
const std::vector<FixtureWord>& fixture_vocabulary();
/// Groups of interchangeable words used for ranking instances and rules.
const std::vector<std::vector<const char*>>& fixture_synonyms();
double fixture_complexity(std::string_view word);

/// Writes lexicon.tsv, corpus.txt, lm.bin, ngram_freq.tsv, simple_freq.tsv,
/// normal_freq.tsv, embeddings.txt (dimension 8), ranking.tsv and
/// rules_labeled.tsv into `dir`.
void write_resource_fixture(const fs::path& dir);
inline constexpr std::size_t kFixtureEmbeddingDim = 8;

/// Everything write_resource_fixture produced, loaded back.
struct FixtureResources {
  explicit FixtureResources(const fs::path& dir);
  Lexicon lexicon;
  SuffixLemmatizer lemmatizer;
  NGramModel lm;
  FrequencyTable ngram;
  FrequencyTable simple;
  FrequencyTable normal;
  EmbeddingStore embeddings;

  FeatureResources view() const;
};

/// PPDB lines `[CAT] ||| source ||| target ||| PPDB2.0Score=q ...` over the
/// fixture vocabulary. Every `malformed_every`-th line (if non-zero) is broken.
void write_ppdb_rules(const fs::path& path, std::size_t n, std::uint64_t seed, std::size_t malformed_every = 0);

}  // namespace lexsimp::testing
