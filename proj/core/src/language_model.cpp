#include "lexsimp/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

namespace {

constexpr std::string_view kMagic = "LXLM";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kUnkId = 0;
constexpr std::uint32_t kBosId = 1;

std::string pack(const std::uint32_t* ids, std::size_t n) {
  std::string key(n * 4, '\0');
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < 4; ++b) key[i * 4 + b] = static_cast<char>((ids[i] >> (8 * b)) & 0xFF);
  }
  return key;
}

std::uint32_t unpack_at(const std::string& key, std::size_t i) {
  std::uint32_t v = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(key[i * 4 + b])) << (8 * b);
  }
  return v;
}

}  // namespace

NGramModel NGramModel::train(const std::vector<std::vector<std::string>>& sentences, const LmOptions& options) {
  if (options.order < 1) throw Error(ErrorCode::kInvalidArgument, "language model order must be >= 1");
  if (!(options.alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "additive alpha must be positive");
  NGramModel lm;
  lm.order_ = options.order;
  lm.alpha_ = options.alpha;
  lm.lowercase_ = options.lowercase;
  lm.words_ = {std::string(kUnk), std::string(kBos)};
  lm.ids_.emplace(std::string(kUnk), kUnkId);
  lm.ids_.emplace(std::string(kBos), kBosId);
  lm.raw_.resize(static_cast<std::size_t>(options.order));

  std::size_t tokens = 0;
  std::vector<std::uint32_t> padded;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    padded.assign(1, kBosId);
    for (const auto& raw : sentence) {
      std::string tok = lm.lowercase_ ? text::to_lower(raw) : raw;
      if (tok == kBos || tok == kUnk) continue;
      auto [it, inserted] = lm.ids_.emplace(tok, static_cast<std::uint32_t>(lm.words_.size()));
      if (inserted) lm.words_.push_back(std::move(tok));
      padded.push_back(it->second);
    }
    tokens += padded.size() - 1;
    for (std::size_t end = 1; end < padded.size(); ++end) {
      const std::size_t max_n = std::min<std::size_t>(lm.raw_.size(), end + 1);
      for (std::size_t n = 1; n <= max_n; ++n) {
        ++lm.raw_[n - 1][pack(padded.data() + end + 1 - n, n)];
      }
    }
  }
  if (tokens == 0) throw Error(ErrorCode::kInvalidArgument, "cannot train a language model on an empty corpus");

  lm.smoothing_ = options.smoothing;
  lm.derive();
  log().info("trained {}-gram LM: {} tokens, {} types, {} smoothing", lm.order_, tokens, lm.vocab_size(),
             lm.smoothing_ == Smoothing::kKneserNey ? "kneser-ney" : "additive");
  return lm;
}

void NGramModel::derive() {
  const std::size_t top = raw_.size();
  level_.assign(top, {});
  contexts_.assign(top, {});
  discounts_.assign(top, 0.0);

  auto fill_raw = [&](std::size_t level) {
    level_[level].clear();
    for (const auto& [key, c] : raw_[level]) level_[level][key] = static_cast<double>(c);
  };

  // Kneser-Ney levels: raw counts at the top, continuation counts below,
  // except n-grams that begin with the sentence marker (no left extension).
  fill_raw(top - 1);
  for (std::size_t n = top - 1; n >= 1; --n) {
    auto& lvl = level_[n - 1];
    for (const auto& [key, c] : raw_[n]) {
      lvl[key.substr(4)] += 1.0;
    }
    for (const auto& [key, c] : raw_[n - 1]) {
      if (unpack_at(key, 0) == kBosId) lvl[key] = static_cast<double>(c);
    }
  }

  bool estimable = top >= 2;
  for (std::size_t n = 0; n < top; ++n) {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    for (const auto& [key, c] : level_[n]) {
      if (c == 1.0) ++n1;
      if (c == 2.0) ++n2;
    }
    if (n1 > 0 && n2 > 0) {
      discounts_[n] = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    } else {
      discounts_[n] = 0.5;
      estimable = false;
    }
  }
  if (smoothing_ == Smoothing::kAuto) smoothing_ = estimable ? Smoothing::kKneserNey : Smoothing::kAdditive;
  if (smoothing_ == Smoothing::kAdditive) {
    for (std::size_t n = 0; n < top; ++n) fill_raw(n);
    std::fill(discounts_.begin(), discounts_.end(), 0.0);
  }

  for (std::size_t n = 0; n < top; ++n) {
    for (const auto& [key, c] : level_[n]) {
      auto& ctx = contexts_[n][key.substr(0, key.size() - 4)];
      ctx.sum += c;
      ctx.distinct += 1.0;
    }
  }
}

std::uint32_t NGramModel::id_of(std::string_view token) const {
  const auto it = lowercase_ ? ids_.find(text::to_lower(token)) : ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

double NGramModel::kn_prob(const std::uint32_t* ids, std::size_t n) const {
  const double uniform = 1.0 / static_cast<double>(vocab_size());
  if (n == 0) return uniform;
  const double lower = kn_prob(ids + 1, n - 1);
  const auto ctx_it = contexts_[n - 1].find(pack(ids, n - 1));
  if (ctx_it == contexts_[n - 1].end() || ctx_it->second.sum <= 0.0) return lower;
  const auto& ctx = ctx_it->second;
  const auto c_it = level_[n - 1].find(pack(ids, n));
  const double c = c_it == level_[n - 1].end() ? 0.0 : c_it->second;
  const double d = discounts_[n - 1];
  return std::max(c - d, 0.0) / ctx.sum + d * ctx.distinct / ctx.sum * lower;
}

double NGramModel::additive_prob(const std::uint32_t* ids, std::size_t n) const {
  const auto ctx_it = contexts_[n - 1].find(pack(ids, n - 1));
  const double sum = ctx_it == contexts_[n - 1].end() ? 0.0 : ctx_it->second.sum;
  const auto c_it = level_[n - 1].find(pack(ids, n));
  const double c = c_it == level_[n - 1].end() ? 0.0 : c_it->second;
  return (c + alpha_) / (sum + alpha_ * static_cast<double>(vocab_size()));
}

double NGramModel::prob(std::span<const std::string> ngram) const {
  if (ngram.empty()) throw Error(ErrorCode::kInvalidArgument, "logprob of an empty n-gram");
  if (ngram.size() > static_cast<std::size_t>(order_)) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram of length " + std::to_string(ngram.size()) +
                                                 " exceeds model order " + std::to_string(order_));
  }
  std::vector<std::uint32_t> ids(ngram.size());
  for (std::size_t i = 0; i < ngram.size(); ++i) ids[i] = id_of(ngram[i]);
  if (ids.back() == kBosId) ids.back() = kUnkId;
  return smoothing_ == Smoothing::kKneserNey ? kn_prob(ids.data(), ids.size())
                                             : additive_prob(ids.data(), ids.size());
}

double NGramModel::logprob(std::span<const std::string> ngram) const { return std::log10(prob(ngram)); }

std::vector<std::string> NGramModel::vocabulary() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i != kBosId) out.push_back(words_[i]);
  }
  return out;
}

std::uint64_t NGramModel::count(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > raw_.size()) return 0;
  std::vector<std::uint32_t> ids(ngram.size());
  for (std::size_t i = 0; i < ngram.size(); ++i) ids[i] = id_of(ngram[i]);
  const auto it = raw_[ngram.size() - 1].find(pack(ids.data(), ids.size()));
  return it == raw_[ngram.size() - 1].end() ? 0 : it->second;
}

void NGramModel::save(std::ostream& out) const {
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(order_));
  w.u8(static_cast<std::uint8_t>(smoothing_));
  w.f64(alpha_);
  w.u8(lowercase_ ? 1 : 0);
  w.u64(words_.size());
  for (const auto& word : words_) w.str(word);
  for (std::size_t n = 1; n <= raw_.size(); ++n) {
    std::vector<std::pair<std::string, std::uint64_t>> entries(raw_[n - 1].begin(), raw_[n - 1].end());
    std::sort(entries.begin(), entries.end());
    w.magic("NGRM");
    w.u32(static_cast<std::uint32_t>(n));
    w.u64(entries.size());
    for (const auto& [key, c] : entries) {
      for (std::size_t i = 0; i < n; ++i) w.u32(unpack_at(key, i));
      w.u64(c);
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing language model");
}

NGramModel NGramModel::load(std::istream& in) {
  BinaryReader r(in, "language model");
  r.expect_magic(kMagic);
  const auto version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::kParse, "unsupported language model version " + std::to_string(version));
  }
  NGramModel lm;
  lm.order_ = static_cast<int>(r.u32());
  if (lm.order_ < 1 || lm.order_ > 16) throw Error(ErrorCode::kParse, "language model: bad order");
  const auto smoothing = r.u8();
  if (smoothing != static_cast<std::uint8_t>(Smoothing::kKneserNey) &&
      smoothing != static_cast<std::uint8_t>(Smoothing::kAdditive)) {
    throw Error(ErrorCode::kParse, "language model: bad smoothing tag");
  }
  lm.smoothing_ = static_cast<Smoothing>(smoothing);
  lm.alpha_ = r.f64();
  lm.lowercase_ = r.u8() != 0;
  const auto nwords = r.u64();
  if (nwords < 2) throw Error(ErrorCode::kParse, "language model: vocabulary too small");
  for (std::uint64_t i = 0; i < nwords; ++i) {
    lm.words_.push_back(r.str());
    lm.ids_.emplace(lm.words_.back(), static_cast<std::uint32_t>(i));
  }
  lm.raw_.resize(static_cast<std::size_t>(lm.order_));
  std::vector<std::uint32_t> ids;
  for (std::size_t n = 1; n <= lm.raw_.size(); ++n) {
    r.expect_magic("NGRM");
    if (r.u32() != n) throw Error(ErrorCode::kParse, "language model: table sections out of order");
    const auto entries = r.u64();
    ids.resize(n);
    for (std::uint64_t e = 0; e < entries; ++e) {
      for (auto& id : ids) {
        id = r.u32();
        if (id >= nwords) throw Error(ErrorCode::kParse, "language model: id out of range");
      }
      lm.raw_[n - 1][pack(ids.data(), n)] = r.u64();
    }
  }
  lm.derive();
  return lm;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  save(out);
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open language model " + path.string());
  return load(in);
}

std::vector<std::vector<std::string>> read_corpus(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (read_line(in, line)) {
    auto toks = text::split_whitespace(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<std::vector<std::string>> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open corpus " + path.string());
  return read_corpus(in);
}

}  // namespace lexsimp
