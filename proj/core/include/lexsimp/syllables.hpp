#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

namespace lexsimp {

class SyllableCounter {
 public:
  virtual ~SyllableCounter() = default;
  /// Syllables of a word or, summed over words, of a phrase.
  virtual int count(std::string_view phrase) const = 0;
};

/// Vowel-group counting (y counts as a vowel) with corrections for silent
/// final e, -ed/-es endings, vowel hiatus (radio, piano) and a small
/// exception table.
class HeuristicSyllableCounter final : public SyllableCounter {
 public:
  int count(std::string_view phrase) const override;
  static int count_word(std::string_view word);
};

/// Table lookup (`word<TAB>syllables`, e.g. exported from a hyphenation
/// dictionary) with the heuristic as fallback.
class DictionarySyllableCounter final : public SyllableCounter {
 public:
  explicit DictionarySyllableCounter(const std::filesystem::path& path);
  explicit DictionarySyllableCounter(std::unordered_map<std::string, int> table) : table_(std::move(table)) {}
  int count(std::string_view phrase) const override;

 private:
  std::unordered_map<std::string, int> table_;
};

/// Heuristic syllable count of a word or phrase.
int count_syllables(std::string_view phrase);

}  // namespace lexsimp
