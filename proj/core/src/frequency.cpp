#include "lexsimp/frequency.hpp"

#include <cmath>
#include <fstream>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

void FrequencyTable::add(std::string token, std::uint64_t count) {
  counts_[std::move(token)] += count;
  total_ += count;
}

std::uint64_t FrequencyTable::count(std::string_view token) const {
  if (auto it = counts_.find(std::string(token)); it != counts_.end()) return it->second;
  if (auto it = counts_.find(text::to_lower(token)); it != counts_.end()) return it->second;
  return 0;
}

bool FrequencyTable::contains(std::string_view token) const {
  return counts_.count(std::string(token)) > 0 || counts_.count(text::to_lower(token)) > 0;
}

FrequencyTable read_frequency_table(std::istream& in, const std::string& source_name) {
  FrequencyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    long long c = 0;
    if (fields.size() != 2 || !text::parse_int(fields[1], c) || c < 0) {
      throw Error(ErrorCode::kParse, source_name + ":" + std::to_string(line_no) +
                                         ": expected token<TAB>non-negative count, line " + std::to_string(line_no));
    }
    table.add(std::string(text::trim(fields[0])), static_cast<std::uint64_t>(c));
  }
  return table;
}

FrequencyTable load_frequency_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open frequency table " + path.string());
  auto table = read_frequency_table(in, path.string());
  log().info("loaded frequency table {} ({} entries)", path.string(), table.size());
  return table;
}

double relative_frequency(const FrequencyTable& simple, const FrequencyTable& normal, std::string_view token,
                          double alpha) {
  return (static_cast<double>(simple.count(token)) + alpha) / (static_cast<double>(normal.count(token)) + alpha);
}

double log_frequency(const FrequencyTable& table, std::string_view phrase) {
  const auto words = text::tokenize(phrase);
  if (words.size() <= 1 || table.contains(phrase)) {
    return std::log10(static_cast<double>(table.count(words.size() == 1 ? std::string_view(words[0]) : phrase)) + 1.0);
  }
  double sum = 0.0;
  for (const auto& w : words) sum += std::log10(static_cast<double>(table.count(w)) + 1.0);
  return sum / static_cast<double>(words.size());
}

double phrase_relative_frequency(const FrequencyTable& simple, const FrequencyTable& normal,
                                 std::string_view phrase, double alpha) {
  const auto words = text::tokenize(phrase);
  if (words.size() == 1) return relative_frequency(simple, normal, words[0], alpha);
  if (words.empty() || simple.contains(phrase) || normal.contains(phrase)) {
    return relative_frequency(simple, normal, phrase, alpha);
  }
  double sum = 0.0;
  for (const auto& w : words) sum += relative_frequency(simple, normal, w, alpha);
  return sum / static_cast<double>(words.size());
}

}  // namespace lexsimp
