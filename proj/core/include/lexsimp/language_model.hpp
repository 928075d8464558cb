#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexsimp {

enum class Smoothing : std::uint8_t {
  /// Kneser-Ney when every order has estimable discounts, additive otherwise.
  kAuto = 0,
  kKneserNey = 1,
  kAdditive = 2,
};

struct LmOptions {
  int order = 5;
  Smoothing smoothing = Smoothing::kAuto;
  /// Additive constant for the add-alpha estimator.
  double alpha = 1.0;
  bool lowercase = true;
};

/// Word n-gram language model. Interpolated Kneser-Ney (one absolute
/// discount per order, continuation counts below the top order, uniform
/// floor over the vocabulary) or add-alpha for corpora too small to
/// estimate discounts. Each corpus line is a sentence; a sentence-start
/// marker is used as left context but never predicted. Tokens unseen in
/// training map to <unk>.
class NGramModel {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBos = "<s>";

  static NGramModel train(const std::vector<std::vector<std::string>>& sentences, const LmOptions& options);

  /// log10 P(last token | preceding tokens). 1 <= ngram.size() <= order().
  double logprob(std::span<const std::string> ngram) const;
  double prob(std::span<const std::string> ngram) const;

  int order() const noexcept { return order_; }
  /// The estimator actually in use (never kAuto).
  Smoothing smoothing() const noexcept { return smoothing_; }
  /// Predictable vocabulary size, <unk> included.
  std::size_t vocab_size() const noexcept { return words_.size() - 1; }
  /// Predictable words (everything but the sentence-start marker).
  std::vector<std::string> vocabulary() const;
  const std::vector<double>& discounts() const noexcept { return discounts_; }
  /// Raw corpus count of an n-gram (as ids are resolved through the vocabulary).
  std::uint64_t count(std::span<const std::string> ngram) const;

  void save(std::ostream& out) const;
  static NGramModel load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

 private:
  struct ContextStats {
    double sum = 0.0;
    double distinct = 0.0;
  };

  NGramModel() = default;
  std::uint32_t id_of(std::string_view token) const;
  void derive();
  double kn_prob(const std::uint32_t* ids, std::size_t n) const;
  double additive_prob(const std::uint32_t* ids, std::size_t n) const;

  int order_ = 0;
  Smoothing smoothing_ = Smoothing::kAdditive;
  double alpha_ = 1.0;
  bool lowercase_ = true;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  // Indexed by n - 1. Keys are packed little-endian u32 id sequences.
  std::vector<std::unordered_map<std::string, std::uint64_t>> raw_;
  std::vector<std::unordered_map<std::string, double>> level_;
  std::vector<std::unordered_map<std::string, ContextStats>> contexts_;
  std::vector<double> discounts_;
};

/// One sentence per line, whitespace-separated tokens.
std::vector<std::vector<std::string>> read_corpus(std::istream& in);
std::vector<std::vector<std::string>> load_corpus(const std::filesystem::path& path);

}  // namespace lexsimp
