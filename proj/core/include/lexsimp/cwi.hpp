#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexsimp/embeddings.hpp"
#include "lexsimp/frequency.hpp"
#include "lexsimp/lexicon.hpp"
#include "lexsimp/metrics.hpp"

namespace lexsimp {

/// A target span (byte offsets into `sentence`) labelled simple or complex.
struct CwiInstance {
  std::string sentence;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool complex = false;

  std::string_view target() const { return std::string_view(sentence).substr(begin, end - begin); }
  /// Throws unless begin < end <= sentence size.
  void validate() const;
  std::vector<std::string> left_tokens() const;
  std::vector<std::string> right_tokens() const;
};

enum class CwiFormat {
  /// `sentence<TAB>word<TAB>token index<TAB>label`.
  kSemEval2016,
  /// `id<TAB>sentence<TAB>start<TAB>end<TAB>target<TAB>...<TAB>binary label<TAB>probability`.
  kCwig3g2,
  /// Picked per file from the column count of the first line.
  kAuto,
};

std::vector<CwiInstance> read_cwi(std::istream& in, const std::string& source_name, CwiFormat format = CwiFormat::kAuto);
std::vector<CwiInstance> load_cwi(const std::filesystem::path& path, CwiFormat format = CwiFormat::kAuto);

/// Threshold over lexicon scores: complex iff the score is >= threshold.
/// Words missing from the lexicon are predicted complex.
struct WcThresholdClassifier {
  double threshold = 0.0;
  /// The training data held a single class.
  bool degenerate = false;

  bool predict(std::optional<double> score) const { return !score || *score >= threshold; }
  bool predict(const CwiInstance& instance, const Lexicon& lexicon, const Lemmatizer* lemmatizer = nullptr) const;
};

/// Picks the cut maximizing training G-score among the minimum score,
/// midpoints of consecutive distinct scores and max + 1 (first maximum
/// wins). Only instances covered by the lexicon take part. Throws when no
/// training instance is covered.
WcThresholdClassifier cwi_wc_only(const std::vector<CwiInstance>& train, const Lexicon& lexicon,
                                  const Lemmatizer* lemmatizer = nullptr);

/// G-score of a threshold classifier on (score, label) points.
double threshold_g_score(const std::vector<std::pair<double, bool>>& points, double threshold);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  /// Coarse tag (NOUN, VERB, ADJ, ADV or OTHER) of tokens[index].
  virtual std::string tag(const std::vector<std::string>& tokens, std::size_t index) const = 0;
};

/// Closed-class word list plus suffix rules.
class HeuristicPosTagger : public PosTagger {
 public:
  std::string tag(const std::vector<std::string>& tokens, std::size_t index) const override;
};

/// Number of senses per word from `word<TAB>count` lines; unknown words have 1.
class SenseInventory {
 public:
  void add(std::string word, int senses);
  int senses(std::string_view word) const;
  std::size_t size() const noexcept { return counts_.size(); }

 private:
  std::unordered_map<std::string, int> counts_;
};
SenseInventory read_sense_inventory(std::istream& in, const std::string& source_name);
SenseInventory load_sense_inventory(const std::filesystem::path& path);

struct CwiFeatureConfig {
  bool length = true;
  bool senses = true;
  bool pos = true;
  bool cosine = true;
  bool frequency = true;
  /// Lexicon presence and score.
  bool wc = false;
};

struct CwiResources {
  const FrequencyTable* ngram_frequency = nullptr;
  const EmbeddingStore* embeddings = nullptr;
  const SenseInventory* senses = nullptr;
  const PosTagger* tagger = nullptr;
  const Lexicon* lexicon = nullptr;
  const Lemmatizer* lemmatizer = nullptr;
};

class CwiFeaturizer {
 public:
  /// Throws kMissingResource when an enabled feature lacks its resource
  /// (the tagger falls back to HeuristicPosTagger).
  CwiFeaturizer(CwiFeatureConfig config, CwiResources resources);

  std::vector<double> features(const CwiInstance& instance) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  CwiFeatureConfig config_;
  CwiResources res_;
  HeuristicPosTagger default_tagger_;
  std::vector<std::string> names_;
};

/// Per-class centroids of z-scored features; nearest by Euclidean distance,
/// ties go to simple.
class NearestCentroid {
 public:
  /// Throws when either class is empty or rows differ in length.
  static NearestCentroid fit(const std::vector<std::vector<double>>& rows, const std::vector<bool>& complex);
  bool predict(const std::vector<double>& row) const;
  const std::vector<double>& centroid(bool complex) const { return complex ? complex_ : simple_; }

 private:
  std::vector<double> standardize(const std::vector<double>& row) const;

  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> simple_;
  std::vector<double> complex_;
};

struct CwiNearestCentroid {
  CwiFeaturizer featurizer;
  NearestCentroid classifier;
  bool predict(const CwiInstance& instance) const { return classifier.predict(featurizer.features(instance)); }
};

CwiNearestCentroid cwi_nearest_centroid(const std::vector<CwiInstance>& train, CwiFeatureConfig config,
                                        const CwiResources& resources);

/// Accuracy, complex-class precision/recall/F1 and G-score.
metrics::EvalReport cwi_report(const std::vector<bool>& predicted, const std::vector<bool>& gold);

}  // namespace lexsimp
