#include "lexsimp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "lexsimp/error.hpp"
#include "lexsimp/random.hpp"

namespace lexsimp::metrics {

namespace {

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": length mismatch (" + std::to_string(a) +
                                                 " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double precision_at_1(const std::vector<std::vector<std::string>>& predicted,
                      const std::vector<GoldRanking>& gold) {
  require_aligned(predicted.size(), gold.size(), "precision_at_1");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& g = gold[i];
    require_aligned(g.candidates.size(), g.ranks.size(), "gold ranking");
    if (predicted[i].empty() || g.ranks.empty()) continue;
    const int best = *std::min_element(g.ranks.begin(), g.ranks.end());
    for (std::size_t c = 0; c < g.candidates.size(); ++c) {
      if (g.ranks[c] == best && g.candidates[c] == predicted[i].front()) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_aligned(x.size(), y.size(), "pearson");
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kNumeric, "undefined correlation: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double ranking_pearson(const std::vector<std::vector<std::string>>& predicted,
                       const std::vector<GoldRanking>& gold) {
  require_aligned(predicted.size(), gold.size(), "ranking_pearson");
  std::vector<double> sys;
  std::vector<double> ref;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& g = gold[i];
    for (std::size_t c = 0; c < g.candidates.size(); ++c) {
      const auto it = std::find(predicted[i].begin(), predicted[i].end(), g.candidates[c]);
      if (it == predicted[i].end()) {
        throw Error(ErrorCode::kInvalidArgument, "ranking_pearson: candidate '" + g.candidates[c] +
                                                     "' missing from prediction " + std::to_string(i));
      }
      sys.push_back(static_cast<double>(it - predicted[i].begin() + 1));
      ref.push_back(static_cast<double>(g.ranks[c]));
    }
  }
  return pearson(sys, ref);
}

double average_precision(const std::vector<bool>& relevance) {
  double sum = 0.0;
  std::size_t relevant = 0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (!relevance[k]) continue;
    ++relevant;
    sum += static_cast<double>(relevant) / static_cast<double>(k + 1);
  }
  return relevant == 0 ? 0.0 : sum / static_cast<double>(relevant);
}

MapResult mean_average_precision(const std::vector<std::vector<bool>>& lists) {
  MapResult out;
  double sum = 0.0;
  for (const auto& l : lists) {
    if (l.empty()) {
      ++out.excluded;
      continue;
    }
    sum += average_precision(l);
    ++out.included;
  }
  out.value = out.included == 0 ? 0.0 : sum / static_cast<double>(out.included);
  return out;
}

double precision_at_1(const std::vector<std::vector<bool>>& lists) {
  std::size_t n = 0;
  std::size_t hits = 0;
  for (const auto& l : lists) {
    if (l.empty()) continue;
    ++n;
    if (l.front()) ++hits;
  }
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

double g_score(double accuracy, double recall) {
  if (accuracy + recall == 0.0) return 0.0;
  return 2.0 * accuracy * recall / (accuracy + recall);
}

ClassReport class_precisions(const std::vector<int>& predicted, const std::vector<int>& gold,
                             const std::vector<int>& classes, int positive_class) {
  require_aligned(predicted.size(), gold.size(), "class_precisions");
  ClassReport report;
  report.count = predicted.size();
  for (int c : classes) report.per_class[c] = ClassStats{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto& p = report.per_class[predicted[i]];
    auto& g = report.per_class[gold[i]];
    ++p.predicted;
    ++g.actual;
    if (predicted[i] == gold[i]) {
      ++p.correct;
      ++correct;
    }
  }
  for (auto& [label, s] : report.per_class) {
    s.precision_defined = s.predicted > 0;
    s.precision = s.predicted ? static_cast<double>(s.correct) / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.actual ? static_cast<double>(s.correct) / static_cast<double>(s.actual) : 0.0;
  }
  report.accuracy = predicted.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted.size());
  const auto& pos = report.per_class[positive_class];
  report.f1 = (pos.precision + pos.recall) == 0.0 ? 0.0
                                                  : 2.0 * pos.precision * pos.recall / (pos.precision + pos.recall);
  return report;
}

double paired_bootstrap(std::size_t instances, const SampleMetric& metric_a, const SampleMetric& metric_b,
                        std::size_t resamples, std::uint64_t seed) {
  if (instances == 0 || resamples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "paired_bootstrap: need instances and resamples");
  }
  Rng rng(seed);
  std::vector<std::size_t> sample(instances);
  std::size_t not_better = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& idx : sample) idx = rng.below(instances);
    if (metric_a(sample) <= metric_b(sample)) ++not_better;
  }
  return static_cast<double>(not_better) / static_cast<double>(resamples);
}

double EvalReport::at(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "no metric named '" + name + "'");
}

std::string EvalReport::to_text() const {
  std::size_t width = 9;
  for (const auto& [k, v] : values) width = std::max(width, k.size());
  for (const auto& [group, items] : breakdowns) {
    for (const auto& [k, v] : items) width = std::max(width, group.size() + 1 + k.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "task" << "  " << task << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "instances" << "  " << instances << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [k, v] : values) {
    out << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
  }
  for (const auto& [group, items] : breakdowns) {
    for (const auto& [k, v] : items) {
      out << std::left << std::setw(static_cast<int>(width)) << (group + "." + k) << "  " << v << '\n';
    }
  }
  return out.str();
}

std::string EvalReport::to_jsonl() const {
  std::string out;
  for (const auto& [k, v] : values) {
    nlohmann::json j = {{"task", task}, {"metric", k}, {"value", v}, {"instances", instances}};
    out += j.dump() + "\n";
  }
  for (const auto& [group, items] : breakdowns) {
    for (const auto& [k, v] : items) {
      nlohmann::json j = {{"task", task}, {"metric", k}, {"group", group}, {"value", v}, {"instances", instances}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

}  // namespace lexsimp::metrics
