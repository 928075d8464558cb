#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lexsimp::metrics {

/// Gold ranking for one instance; rank 1 is simplest, ties allowed.
struct GoldRanking {
  std::vector<std::string> candidates;
  std::vector<int> ranks;
};

/// Fraction of instances whose predicted top candidate is among the gold
/// rank-1 candidates (any of them, when several share rank 1).
double precision_at_1(const std::vector<std::vector<std::string>>& predicted,
                      const std::vector<GoldRanking>& gold);

/// Pearson r. Throws on length mismatch, fewer than 2 points, or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson between predicted positions and gold ranks, pooled over all
/// candidates of all instances.
double ranking_pearson(const std::vector<std::vector<std::string>>& predicted,
                       const std::vector<GoldRanking>& gold);

/// Average precision of one ranked list; 0 when nothing is relevant.
double average_precision(const std::vector<bool>& relevance);

struct MapResult {
  double value = 0.0;
  std::size_t included = 0;
  /// Empty lists (targets with no generated candidates) left out of the mean.
  std::size_t excluded = 0;
};

MapResult mean_average_precision(const std::vector<std::vector<bool>>& lists);

/// Fraction of non-empty lists whose first item is relevant.
double precision_at_1(const std::vector<std::vector<bool>>& lists);

/// Harmonic mean of accuracy and recall; 0 when both are 0.
double g_score(double accuracy, double recall);

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
  std::size_t correct = 0;
  /// False when the class was never predicted (precision reported as 0).
  bool precision_defined = false;
};

struct ClassReport {
  std::map<int, ClassStats> per_class;
  double accuracy = 0.0;
  /// F1 of the positive class.
  double f1 = 0.0;
  std::size_t count = 0;
};

ClassReport class_precisions(const std::vector<int>& predicted, const std::vector<int>& gold,
                             const std::vector<int>& classes, int positive_class);

/// One-sided paired bootstrap: fraction of resamples in which system A does
/// not beat system B. Each metric is evaluated on a resampled index list.
using SampleMetric = std::function<double(std::span<const std::size_t>)>;
double paired_bootstrap(std::size_t instances, const SampleMetric& metric_a, const SampleMetric& metric_b,
                        std::size_t resamples = 10000, std::uint64_t seed = 0);

/// Named results of one evaluation, rendered for humans or as JSON lines.
struct EvalReport {
  std::string task;
  std::size_t instances = 0;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> breakdowns;

  void add(std::string name, double value) { values.emplace_back(std::move(name), value); }
  double at(const std::string& name) const;

  std::string to_text() const;
  std::string to_jsonl() const;
};

}  // namespace lexsimp::metrics
