#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>

namespace lexsimp {

/// token -> corpus count, loaded from `token<TAB>count` lines. Tokens may be
/// multi-word n-grams.
class FrequencyTable {
 public:
  void add(std::string token, std::uint64_t count);

  /// Exact key, then lowercase key; 0 when absent.
  std::uint64_t count(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::uint64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return counts_.size(); }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

FrequencyTable read_frequency_table(std::istream& in, const std::string& source_name);
FrequencyTable load_frequency_table(const std::filesystem::path& path);

/// (count_simple + alpha) / (count_normal + alpha).
double relative_frequency(const FrequencyTable& simple, const FrequencyTable& normal, std::string_view token,
                          double alpha = 1.0);

/// log10(count + 1) of a word or phrase. A phrase missing from the table
/// gets the mean over its words.
double log_frequency(const FrequencyTable& table, std::string_view phrase);

/// Phrase-level relative frequency; phrases missing from both tables get the
/// mean of their words' ratios.
double phrase_relative_frequency(const FrequencyTable& simple, const FrequencyTable& normal,
                                 std::string_view phrase, double alpha = 1.0);

}  // namespace lexsimp
