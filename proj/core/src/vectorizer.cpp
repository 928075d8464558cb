#include "lexsimp/vectorizer.hpp"

#include "lexsimp/error.hpp"

namespace lexsimp {

PairVectorizer::PairVectorizer(FeatureSchema schema, bool use_binning, GaussianBinner binner)
    : schema_(std::move(schema)), use_binning_(use_binning), binner_(std::move(binner)), hash_(schema_.hash()) {
  auto slot = [&](const FeatureSpec& spec, const std::string& key) {
    if (!use_binning_ || !spec.binnable) return Slot{kRaw, 1};
    const auto& feats = binner_.features();
    for (std::size_t i = 0; i < feats.size(); ++i) {
      if (feats[i].first == key) return Slot{i, feats[i].second.centers.size()};
    }
    throw Error(ErrorCode::kSchemaMismatch, "binner has no parameters for '" + key + "'");
  };
  for (const auto* s : schema_.side_scalars()) {
    side_.push_back(slot(*s, side_key(s->name)));
    diff_.push_back(slot(*s, diff_key(s->name)));
    input_dim_ += 2 * side_.back().width + diff_.back().width;
  }
  for (const auto* s : schema_.pair_scalars()) {
    pair_.push_back(slot(*s, pair_key(s->name)));
    input_dim_ += pair_.back().width;
  }
  if (const auto* v = schema_.pair_vector()) vec_width_ = v->width;
  input_dim_ += vec_width_;
  if (input_dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "feature schema has no enabled features");
}

PairVectorizer PairVectorizer::fit(const FeatureSchema& schema, bool use_binning, const BinnerConfig& config,
                                   std::span<const PairFeatures> training) {
  if (training.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot fit a vectorizer on no data");
  const auto hash = schema.hash();
  for (const auto& f : training) {
    if (f.schema_hash != hash) throw Error(ErrorCode::kSchemaMismatch, "training features use a different schema");
  }
  std::vector<GaussianBinner::Column> columns;
  if (use_binning) {
    const auto sides = schema.side_scalars();
    for (std::size_t i = 0; i < sides.size(); ++i) {
      if (!sides[i]->binnable) continue;
      std::vector<double> both;
      std::vector<double> diffs;
      both.reserve(training.size() * 2);
      diffs.reserve(training.size());
      for (const auto& f : training) {
        both.push_back(f.a.at(i));
        both.push_back(f.b.at(i));
        diffs.push_back(f.diff.at(i));
      }
      columns.emplace_back(side_key(sides[i]->name), std::move(both));
      columns.emplace_back(diff_key(sides[i]->name), std::move(diffs));
    }
    const auto pairs = schema.pair_scalars();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!pairs[i]->binnable) continue;
      std::vector<double> vals;
      for (const auto& f : training) vals.push_back(f.pair.at(i));
      columns.emplace_back(pair_key(pairs[i]->name), std::move(vals));
    }
  }
  return PairVectorizer(schema, use_binning, GaussianBinner::fit(config, columns));
}

void PairVectorizer::transform(const PairFeatures& f, std::span<double> out) const {
  if (f.schema_hash != hash_) {
    throw Error(ErrorCode::kSchemaMismatch, "features were extracted under a different schema than the model's");
  }
  if (out.size() != input_dim_ || f.a.size() != side_.size() || f.b.size() != side_.size() ||
      f.diff.size() != side_.size() || f.pair.size() != pair_.size() || f.vec.size() != vec_width_) {
    throw Error(ErrorCode::kSchemaMismatch, "feature vector shape does not match the model schema");
  }
  std::size_t pos = 0;
  auto put = [&](const Slot& s, double v) {
    if (s.bins == kRaw) {
      out[pos++] = v;
    } else {
      binner_.features()[s.bins].second.transform(v, out.subspan(pos, s.width));
      pos += s.width;
    }
  };
  for (std::size_t i = 0; i < side_.size(); ++i) {
    put(side_[i], f.a[i]);
    put(side_[i], f.b[i]);
    put(diff_[i], f.diff[i]);
  }
  for (std::size_t i = 0; i < pair_.size(); ++i) put(pair_[i], f.pair[i]);
  for (double v : f.vec) out[pos++] = v;
}

std::vector<double> PairVectorizer::transform(const PairFeatures& features) const {
  std::vector<double> out(input_dim_);
  transform(features, out);
  return out;
}

}  // namespace lexsimp
