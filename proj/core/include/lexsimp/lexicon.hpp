#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexsimp {

inline constexpr double kMinComplexity = 1.0;
inline constexpr double kMaxComplexity = 6.0;

/// Produces candidate lemmas for a surface word, most likely first.
class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::vector<std::string> lemmas(std::string_view word) const = 0;
};

/// Rule-based fallback: strips -s/-es/-ies/-ed/-ing and proposes the usual
/// spelling repairs (restored final e, undoubled consonant).
class SuffixLemmatizer final : public Lemmatizer {
 public:
  std::vector<std::string> lemmas(std::string_view word) const override;
};

struct LexiconHit {
  bool present = false;
  double score = 0.0;
};

/// Word-complexity lexicon: surface word -> averaged human rating on the
/// 6-point scale. Immutable once built.
class Lexicon {
 public:
  Lexicon() = default;

  /// Throws if the score lies outside [1, 6] or the word is already present.
  void insert(std::string word, double score);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Exact key, then lowercase key.
  std::optional<double> find(std::string_view word) const;

  /// Feature lookup for a word or phrase. Multi-word phrases are looked up
  /// by their longest word (first one on ties). Falls back to lemmas when a
  /// lemmatizer is given. Absent words yield {false, 0.0}.
  LexiconHit lookup(std::string_view phrase, const Lemmatizer* lemmatizer = nullptr) const;

  /// Entries sorted by word, for deterministic serialization.
  std::vector<std::pair<std::string, double>> sorted_entries() const;

  const std::string& source() const noexcept { return source_; }
  void set_source(std::string source) { source_ = std::move(source); }

 private:
  std::unordered_map<std::string, double> entries_;
  std::string source_;
};

/// Reads `word<TAB>score` lines; `#` lines and blank lines are skipped.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon read_lexicon(std::istream& in, const std::string& source_name);
void write_lexicon(std::ostream& out, const Lexicon& lexicon);

/// One word with its ratings in annotator order. A missing rating (the
/// annotator did not rate this word) is nullopt.
struct RatingRecord {
  std::string word;
  std::vector<std::optional<int>> ratings;
};

/// Reads `word<TAB>r1<TAB>r2...`; an empty field or `-` marks a missing rating.
std::vector<RatingRecord> load_ratings(const std::filesystem::path& path);
std::vector<RatingRecord> read_ratings(std::istream& in, const std::string& source_name);

/// Outlier rule: drop rating r_i when |r_i - mean(other ratings)| exceeds
/// `threshold`. `inclusive` also drops differences exactly at the threshold.
struct OutlierPolicy {
  double threshold = 2.0;
  bool inclusive = false;

  bool discards(double diff) const { return inclusive ? diff >= threshold : diff > threshold; }
  static OutlierPolicy strict() { return {2.0, false}; }
  static OutlierPolicy inclusive_ties() { return {2.0, true}; }
};

struct AggregationResult {
  Lexicon lexicon;
  /// Words whose every rating would have been discarded; these keep the
  /// plain mean.
  std::vector<std::string> flagged;
  std::size_t ratings_total = 0;
  std::size_t ratings_discarded = 0;
};

/// Averages each word's ratings after a single pass of outlier removal.
/// Records sharing a word are merged.
AggregationResult aggregate_ratings(const std::vector<RatingRecord>& records,
                                    OutlierPolicy policy = OutlierPolicy::strict());

/// Which ratings survive the outlier pass, aligned with `ratings`.
std::vector<bool> surviving_ratings(const std::vector<int>& ratings, OutlierPolicy policy);

/// Pearson correlation between one annotator's ratings and the per-word mean
/// of everybody else's, over the words that annotator rated. With a policy,
/// outlying ratings are removed first (on both sides).
double interannotator_agreement(const std::vector<RatingRecord>& records, std::size_t annotator,
                                const OutlierPolicy* discard = nullptr);

/// Mean of interannotator_agreement over annotators with a defined value.
double mean_interannotator_agreement(const std::vector<RatingRecord>& records,
                                     const OutlierPolicy* discard = nullptr);

}  // namespace lexsimp
