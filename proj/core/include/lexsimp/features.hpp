#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexsimp/embeddings.hpp"
#include "lexsimp/frequency.hpp"
#include "lexsimp/language_model.hpp"
#include "lexsimp/lexicon.hpp"
#include "lexsimp/syllables.hpp"

namespace lexsimp {

enum class FeatureGroup : std::uint8_t {
  kSurface = 0,
  kFrequency = 1,
  kLexicon = 2,
  kContext = 3,
  kEmbeddings = 4,
  /// Caller-defined features (no built-in extractor).
  kCustom = 5,
};

std::string_view to_string(FeatureGroup group);
std::optional<FeatureGroup> parse_feature_group(std::string_view name);

enum class FeatureKind : std::uint8_t { kScalar = 0, kVector = 1 };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kScalar;
  FeatureGroup group = FeatureGroup::kCustom;
  /// Computed on the pair rather than once per side.
  bool pairwise = false;
  bool binnable = true;
  bool enabled = true;
  /// Length of a vector feature; 1 for scalars.
  std::size_t width = 1;
};

/// Ordered feature inventory. Only enabled features reach the network; the
/// hash covers exactly the ordered enabled set.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  /// Throws on duplicate names or a binnable vector feature.
  explicit FeatureSchema(std::vector<FeatureSpec> specs);

  /// The full lexical/corpus/lexicon/context/embedding inventory.
  static FeatureSchema standard(std::size_t embedding_dim = 300);

  void set_group_enabled(FeatureGroup group, bool enabled);
  void set_enabled(std::string_view name, bool enabled);

  const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }
  /// Enabled per-side scalar features, in order.
  std::vector<const FeatureSpec*> side_scalars() const;
  /// Enabled pairwise scalar features, in order.
  std::vector<const FeatureSpec*> pair_scalars() const;
  /// Enabled pairwise vector feature, if any.
  const FeatureSpec* pair_vector() const;
  bool group_enabled(FeatureGroup group) const;
  std::optional<std::size_t> side_index(std::string_view name) const;

  std::uint64_t hash() const;

 private:
  std::vector<FeatureSpec> specs_;
};

/// Names of the per-side context features, i.e. every n-gram (n = 2..5) of
/// the +-2 window that covers the target position.
struct ContextSlot {
  int n;
  /// Start of the n-gram relative to the target (0 = starts at the target).
  int start;
  std::string name() const;
};
const std::vector<ContextSlot>& context_slots();

/// Up to two tokens on each side of a target; `left` is in reading order
/// (the token adjacent to the target is last).
struct Context {
  std::vector<std::string> left;
  std::vector<std::string> right;
  bool empty() const noexcept { return left.empty() && right.empty(); }
};

/// Borrowed resources. Only the groups enabled in the schema need theirs.
struct FeatureResources {
  const Lexicon* lexicon = nullptr;
  const Lemmatizer* lemmatizer = nullptr;
  const NGramModel* lm = nullptr;
  const FrequencyTable* ngram_frequency = nullptr;
  const FrequencyTable* simple_frequency = nullptr;
  const FrequencyTable* normal_frequency = nullptr;
  const EmbeddingStore* embeddings = nullptr;
  const SyllableCounter* syllables = nullptr;
};

struct PairFeatures {
  std::uint64_t schema_hash = 0;
  /// Enabled per-side scalars of w_a / w_b, in schema order.
  std::vector<double> a;
  std::vector<double> b;
  /// a[i] - b[i].
  std::vector<double> diff;
  /// Enabled pairwise scalars (cosine).
  std::vector<double> pair;
  /// Embedding difference w_a - w_b; empty when embeddings are disabled.
  std::vector<double> vec;
};

class FeatureExtractor {
 public:
  /// Throws kMissingResource naming the first resource an enabled group lacks.
  FeatureExtractor(FeatureSchema schema, FeatureResources resources);

  const FeatureSchema& schema() const noexcept { return schema_; }

  /// Enabled per-side scalars for one word or phrase.
  std::vector<double> extract_single(std::string_view phrase, const Context* context = nullptr) const;

  PairFeatures extract_pair(std::string_view a, std::string_view b, const Context* context_a = nullptr,
                            const Context* context_b = nullptr) const;

  /// Mean log10 probability over every n-gram (up to the LM order) inside
  /// the phrase; the value context features take when no context applies.
  double context_free_logprob(const std::vector<std::string>& tokens) const;

  /// Pairs assembled from already-extracted sides (used when the same
  /// candidate appears in many pairs).
  PairFeatures combine(const std::vector<double>& a, const std::vector<double>& b,
                       const PhraseEmbedding* emb_a, const PhraseEmbedding* emb_b) const;
  PhraseEmbedding embed(std::string_view phrase) const;

 private:
  std::vector<double> context_features(const std::vector<std::string>& tokens, const Context* context) const;
  double lm_logprob_truncated(std::span<const std::string> ngram) const;

  FeatureSchema schema_;
  FeatureResources res_;
  HeuristicSyllableCounter default_syllables_;
  std::vector<FeatureSpec> side_;
  std::vector<FeatureSpec> pair_;
  std::optional<FeatureSpec> vec_;
};

}  // namespace lexsimp
