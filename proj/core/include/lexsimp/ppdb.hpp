#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexsimp/features.hpp"
#include "lexsimp/model.hpp"

namespace lexsimp {

enum class RuleClass : std::int8_t { kComplicating = -1, kNoDifference = 0, kSimplifying = 1 };

std::string_view to_string(RuleClass c);
std::optional<RuleClass> parse_rule_class(std::string_view s);

/// ŷ below `lower` is complicating, above `upper` simplifying; the
/// boundaries themselves are no-difference.
struct ClassThresholds {
  double lower = -0.4;
  double upper = 0.4;
};

RuleClass classify_score(double yhat, const ClassThresholds& thresholds = {});

struct ParaphraseRule {
  std::string category;
  std::string source;
  std::string target;
  std::optional<double> quality;
};

/// Zero-based positions of the fields among the ` ||| `-separated columns.
/// A negative quality column means the file carries no quality score.
struct PpdbColumns {
  int category = 0;
  int source = 1;
  int target = 2;
  int quality = 3;

  /// "category,source,target,quality", e.g. "0,1,2,3" or "0,1,2,-1".
  static PpdbColumns parse(std::string_view spec);
};

/// nullopt for a malformed line. The quality column may hold a bare number
/// or a feature list containing `PPDB2.0Score=<value>`.
std::optional<ParaphraseRule> parse_ppdb_line(std::string_view line, const PpdbColumns& columns = {});

/// Human-labelled training rules: `source<TAB>target<TAB>label` with label
/// in {-1, 0, 1} (1 = the target is simpler).
struct LabeledRule {
  std::string source;
  std::string target;
  RuleClass label = RuleClass::kNoDifference;
};
std::vector<LabeledRule> read_labeled_rules(std::istream& in, const std::string& source_name);
std::vector<LabeledRule> load_labeled_rules(const std::filesystem::path& path);
std::vector<LabeledPair> ppdb_training_set(const FeatureExtractor& extractor, const std::vector<LabeledRule>& rules);

/// Scores one rule; must be safe to call from several threads at once.
using RuleScorer = std::function<double(const ParaphraseRule&)>;

/// ŷ for (source, target) clamped to [-1, 1].
RuleScorer nrr_rule_scorer(const NRRModel& model, const FeatureExtractor& extractor);

struct SimplePpdbOptions {
  std::size_t jobs = 1;
  /// Rules read, scored and written per step; also the checkpoint interval.
  std::size_t chunk_size = 2048;
  PpdbColumns columns;
  ClassThresholds thresholds;
  std::optional<std::filesystem::path> checkpoint;
  /// Continue from the checkpoint if one exists.
  bool resume = false;
  /// Stop after this many input lines (total, including earlier runs).
  std::optional<std::uint64_t> stop_after;
};

struct SimplePpdbStats {
  std::uint64_t lines = 0;
  std::uint64_t scored = 0;
  std::uint64_t malformed = 0;
  /// Indexed by class + 1.
  std::array<std::uint64_t, 3> classes{};
  bool completed = false;

  std::uint64_t count(RuleClass c) const { return classes[static_cast<std::size_t>(static_cast<int>(c) + 1)]; }
};

/// Writes one `category, source, target, yhat, class, quality` TSV row per
/// well-formed rule, in input order regardless of `jobs`. No checkpointing.
SimplePpdbStats build_simpleppdb(const RuleScorer& scorer, std::istream& in, std::ostream& out,
                                 const SimplePpdbOptions& options);

/// File variant with checkpoint/resume: after every chunk the output is
/// flushed and the checkpoint (lines consumed, input offset, output size,
/// counts) replaced atomically. Resuming truncates the output to the
/// checkpointed size and continues from the recorded input offset.
SimplePpdbStats build_simpleppdb(const RuleScorer& scorer, const std::filesystem::path& input,
                                 const std::filesystem::path& output, const SimplePpdbOptions& options);

struct ScoredRule {
  std::string category;
  std::string source;
  std::string target;
  double yhat = 0.0;
  RuleClass cls = RuleClass::kNoDifference;
  std::optional<double> quality;
};

std::optional<ScoredRule> parse_scored_rule(std::string_view line);
std::vector<ScoredRule> read_simpleppdb(std::istream& in, const std::string& source_name);
std::vector<ScoredRule> load_simpleppdb(const std::filesystem::path& path);

/// Scored rules grouped by (lowercased) source phrase.
class SubstitutionIndex {
 public:
  explicit SubstitutionIndex(std::vector<ScoredRule> rules);
  const std::vector<ScoredRule>& rules_for(std::string_view source) const;
  std::size_t size() const noexcept { return size_; }

 private:
  std::unordered_map<std::string, std::vector<ScoredRule>> by_source_;
  std::size_t size_ = 0;
};

struct GenerationConfig {
  /// Inclusive quality minimum for single-word targets.
  double word_quality = 3.5;
  /// Inclusive quality minimum for multi-word targets.
  double phrase_quality = 4.0;
};

struct Substitution {
  std::string text;
  double yhat = 0.0;
  double quality = 0.0;
  std::string category;
};

/// Candidates for `target` whose rule passes the quality minimum and has the
/// same syntactic category (brackets ignored; empty category matches all),
/// most simplifying first. Duplicate candidates keep their best score.
std::vector<Substitution> generate_substitutions(std::string_view target, std::string_view category,
                                                 const SubstitutionIndex& index, const GenerationConfig& config = {});

}  // namespace lexsimp
