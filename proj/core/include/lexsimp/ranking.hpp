#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lexsimp/features.hpp"
#include "lexsimp/metrics.hpp"
#include "lexsimp/model.hpp"

namespace lexsimp {

/// A target word in context with candidate substitutions and their gold
/// simplicity ranks (1 = simplest; ties allowed).
struct RankingInstance {
  std::vector<std::string> sentence;
  std::size_t target = 0;
  std::vector<std::string> candidates;
  std::vector<int> ranks;

  /// Throws kInvalidArgument unless there are >= 2 candidates, one rank per
  /// candidate and the target index lies inside the sentence.
  void validate() const;
  /// Up to two tokens on each side of the target.
  Context context() const;
  metrics::GoldRanking gold() const;
};

/// One ordered candidate pair (indices into the instance's candidates).
struct RankingPair {
  std::size_t instance = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  /// rank(a) - rank(b).
  double label = 0.0;
};

/// Both orders of every unordered candidate pair: (i, j) then (j, i) for i < j.
std::vector<RankingPair> build_ranking_pairs(const std::vector<RankingInstance>& instances);

/// Feature vectors for build_ranking_pairs, with each side's context.
std::vector<LabeledPair> ranking_training_set(const FeatureExtractor& extractor,
                                              const std::vector<RankingInstance>& instances);

struct RankedCandidate {
  std::string text;
  /// Sum of pairwise scores against every other candidate.
  double score = 0.0;
  /// Position in the input candidate list.
  std::size_t index = 0;
};

/// score(i, j) is the relative complexity of candidate i over candidate j.
using PairScore = std::function<double(std::size_t, std::size_t)>;

/// Sorts candidates by the summed pairwise score, simplest first; ties break
/// on candidate text. Throws with fewer than 2 candidates.
std::vector<RankedCandidate> rank_by_pairwise(const std::vector<std::string>& candidates, const PairScore& score);

std::vector<RankedCandidate> rank_candidates(const NRRModel& model, const FeatureExtractor& extractor,
                                             const RankingInstance& instance);

/// Tab-separated lines: sentence, target, target position, then one
/// `rank:candidate` field per candidate.
std::vector<RankingInstance> read_ranking_instances(std::istream& in, const std::string& source_name);
std::vector<RankingInstance> load_ranking_instances(const std::filesystem::path& path);

struct RankingEvaluation {
  metrics::EvalReport report;
  std::vector<std::vector<RankedCandidate>> rankings;
};

/// P@1 and pooled Pearson of the model's rankings against the gold ranks.
RankingEvaluation evaluate_ranking(const NRRModel& model, const FeatureExtractor& extractor,
                                   const std::vector<RankingInstance>& instances);

}  // namespace lexsimp
