#include "lexsimp/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

FeatureBins FeatureBins::make(double f_min, double f_max, int k, double gamma) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "number of bins must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  if (!std::isfinite(f_min) || !std::isfinite(f_max) || !(f_max > f_min)) {
    throw Error(ErrorCode::kInvalidArgument, "bin range needs f_max > f_min (got [" + text::format_double(f_min) +
                                                 ", " + text::format_double(f_max) + "])");
  }
  FeatureBins b;
  b.f_min = f_min;
  b.f_max = f_max;
  b.k = k;
  b.gamma = gamma;
  const double width = (f_max - f_min) / k;
  b.sigma = gamma * width;
  if (!(b.sigma >= kMinSigma)) {
    log().warn("sigma {} underflows, floored at {}", b.sigma, kMinSigma);
    b.sigma = kMinSigma;
  }
  b.centers.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) b.centers[static_cast<std::size_t>(j)] = f_min + (j + 0.5) * width;
  return b;
}

void FeatureBins::transform(double value, std::span<double> out) const {
  if (out.size() != centers.size()) throw Error(ErrorCode::kInvalidArgument, "bin output has the wrong size");
  if (!std::isfinite(value)) throw Error(ErrorCode::kNumeric, "cannot bin a non-finite value");
  // Dividing by the sum of the responses is the same as shifting the
  // exponents by their maximum first; the shift keeps far out-of-range
  // values from underflowing every response to zero.
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double d = value - centers[j];
    out[j] = -d * d * inv;
    top = std::max(top, out[j]);
  }
  double sum = 0.0;
  for (auto& x : out) {
    x = std::exp(x - top);
    sum += x;
  }
  for (auto& x : out) x /= sum;
}

GaussianBinner GaussianBinner::fit(const BinnerConfig& config, const std::vector<Column>& columns) {
  GaussianBinner binner;
  for (const auto& [name, values] : columns) {
    if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "feature '" + name + "' has no training values");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNumeric, "feature '" + name + "' has a non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
      if (config.constant_columns == ConstantColumnPolicy::kError) {
        throw Error(ErrorCode::kInvalidArgument,
                    "feature '" + name + "' is constant in training data; its bin range is undefined");
      }
      log().warn("feature '{}' is constant ({}); using range [v-0.5, v+0.5]", name, lo);
      lo -= 0.5;
      hi += 0.5;
    }
    binner.add(name, FeatureBins::make(lo, hi, config.k, config.gamma));
  }
  return binner;
}

void GaussianBinner::add(std::string name, FeatureBins bins) {
  const auto [it, inserted] = index_.emplace(name, features_.size());
  if (!inserted) throw Error(ErrorCode::kInvalidArgument, "feature '" + name + "' binned twice");
  features_.emplace_back(std::move(name), std::move(bins));
}

bool GaussianBinner::has(std::string_view name) const { return index_.count(std::string(name)) > 0; }

const FeatureBins& GaussianBinner::bins(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(ErrorCode::kInvalidArgument, "feature '" + std::string(name) + "' is not fitted");
  return features_[it->second].second;
}

std::vector<double> GaussianBinner::transform(std::string_view name, double value) const {
  const auto& b = bins(name);
  std::vector<double> out(b.centers.size());
  b.transform(value, out);
  return out;
}

void GaussianBinner::transform_into(std::string_view name, double value, std::span<double> out) const {
  bins(name).transform(value, out);
}

}  // namespace lexsimp
