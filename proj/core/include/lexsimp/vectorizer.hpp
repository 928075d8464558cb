#pragma once

#include <span>
#include <vector>

#include "lexsimp/binning.hpp"
#include "lexsimp/features.hpp"

namespace lexsimp {

/// Turns PairFeatures into the network input: for each per-side scalar the
/// binned (or raw) a, b and a-b values, then the pairwise scalars, then the
/// raw embedding difference. Binned features share one range for a and b;
/// differences and pairwise scalars get their own ranges. Indicator features
/// marked non-binnable pass through raw.
class PairVectorizer {
 public:
  PairVectorizer(FeatureSchema schema, bool use_binning, GaussianBinner binner);

  static PairVectorizer fit(const FeatureSchema& schema, bool use_binning, const BinnerConfig& config,
                            std::span<const PairFeatures> training);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const GaussianBinner& binner() const noexcept { return binner_; }
  bool use_binning() const noexcept { return use_binning_; }
  std::size_t input_dim() const noexcept { return input_dim_; }

  /// Throws kSchemaMismatch when the features were built under another schema.
  void transform(const PairFeatures& features, std::span<double> out) const;
  std::vector<double> transform(const PairFeatures& features) const;

  static std::string side_key(const std::string& name) { return "side:" + name; }
  static std::string diff_key(const std::string& name) { return "diff:" + name; }
  static std::string pair_key(const std::string& name) { return "pair:" + name; }

 private:
  static constexpr std::size_t kRaw = static_cast<std::size_t>(-1);
  /// Index into binner_.features(), or kRaw. Indices keep copies valid.
  struct Slot {
    std::size_t bins = kRaw;
    std::size_t width = 1;
  };

  FeatureSchema schema_;
  bool use_binning_;
  GaussianBinner binner_;
  std::uint64_t hash_;
  std::vector<Slot> side_;
  std::vector<Slot> diff_;
  std::vector<Slot> pair_;
  std::size_t vec_width_ = 0;
  std::size_t input_dim_ = 0;
};

}  // namespace lexsimp
