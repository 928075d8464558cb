#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lexsimp {

enum class ConstantColumnPolicy {
  /// A column without two distinct values is an error.
  kError,
  /// Give such a column the unit range [v - 0.5, v + 0.5] and warn.
  kWiden,
};

struct BinnerConfig {
  int k = 10;
  double gamma = 0.2;
  ConstantColumnPolicy constant_columns = ConstantColumnPolicy::kError;
};

inline constexpr double kMinSigma = 1e-12;

/// Soft bins of one feature: k Gaussians centred on the midpoints of k equal
/// sub-intervals of [f_min, f_max], each with sigma = gamma * bin width.
struct FeatureBins {
  double f_min = 0.0;
  double f_max = 1.0;
  int k = 10;
  double gamma = 0.2;
  double sigma = 0.02;
  std::vector<double> centers;

  /// Throws unless f_max > f_min, k >= 1 and gamma > 0.
  static FeatureBins make(double f_min, double f_max, int k, double gamma);

  /// Normalized Gaussian responses (sum 1) written to `out` (size k).
  void transform(double value, std::span<double> out) const;
};

/// Fitted Gaussian vectorizer: one FeatureBins per named feature.
class GaussianBinner {
 public:
  using Column = std::pair<std::string, std::vector<double>>;

  /// Ranges come from the given (training) columns only.
  static GaussianBinner fit(const BinnerConfig& config, const std::vector<Column>& columns);

  void add(std::string name, FeatureBins bins);
  bool has(std::string_view name) const;
  const FeatureBins& bins(std::string_view name) const;
  const std::vector<std::pair<std::string, FeatureBins>>& features() const noexcept { return features_; }

  /// Throws if `name` was never fitted.
  std::vector<double> transform(std::string_view name, double value) const;
  void transform_into(std::string_view name, double value, std::span<double> out) const;

 private:
  std::vector<std::pair<std::string, FeatureBins>> features_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace lexsimp
