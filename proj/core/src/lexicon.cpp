#include "lexsimp/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/metrics.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

void push_unique(std::vector<std::string>& out, std::string s) {
  if (s.size() < 2) return;
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
}

void push_stem_variants(std::vector<std::string>& out, const std::string& stem) {
  push_unique(out, stem);
  push_unique(out, stem + "e");
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1])) {
    push_unique(out, stem.substr(0, n - 1));
  }
}

}  // namespace

std::vector<std::string> SuffixLemmatizer::lemmas(std::string_view word) const {
  const std::string w = text::to_lower(word);
  std::vector<std::string> out;
  if (ends_with(w, "ies") && w.size() > 4) {
    push_unique(out, w.substr(0, w.size() - 3) + "y");
  }
  if (ends_with(w, "es") && w.size() > 3) {
    push_unique(out, w.substr(0, w.size() - 2));
    push_unique(out, w.substr(0, w.size() - 1));
  } else if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() > 3) {
    push_unique(out, w.substr(0, w.size() - 1));
  }
  if (ends_with(w, "ied") && w.size() > 4) {
    push_unique(out, w.substr(0, w.size() - 3) + "y");
  }
  if (ends_with(w, "ed") && w.size() > 3) {
    push_stem_variants(out, w.substr(0, w.size() - 2));
  }
  if (ends_with(w, "ing") && w.size() > 4) {
    push_stem_variants(out, w.substr(0, w.size() - 3));
  }
  return out;
}

void Lexicon::insert(std::string word, double score) {
  if (!(score >= kMinComplexity && score <= kMaxComplexity)) {
    throw Error(ErrorCode::kInvalidArgument,
                "score out of range for '" + word + "': " + text::format_double(score));
  }
  const auto [it, inserted] = entries_.emplace(std::move(word), score);
  if (!inserted) throw Error(ErrorCode::kInvalidArgument, "duplicate lexicon entry '" + it->first + "'");
}

std::optional<double> Lexicon::find(std::string_view word) const {
  if (auto it = entries_.find(std::string(word)); it != entries_.end()) return it->second;
  if (auto it = entries_.find(text::to_lower(word)); it != entries_.end()) return it->second;
  return std::nullopt;
}

LexiconHit Lexicon::lookup(std::string_view phrase, const Lemmatizer* lemmatizer) const {
  const auto tokens = text::tokenize(phrase);
  if (tokens.empty()) return {};
  const auto longest = std::max_element(tokens.begin(), tokens.end(), [](const auto& a, const auto& b) {
    return a.size() < b.size();
  });
  if (auto s = find(*longest)) return {true, *s};
  if (lemmatizer != nullptr) {
    for (const auto& lemma : lemmatizer->lemmas(*longest)) {
      if (auto s = find(lemma)) return {true, *s};
    }
  }
  return {};
}

std::vector<std::pair<std::string, double>> Lexicon::sorted_entries() const {
  std::vector<std::pair<std::string, double>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Lexicon read_lexicon(std::istream& in, const std::string& source_name) {
  Lexicon lex;
  lex.set_source(source_name);
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    const auto where = source_name + ":" + std::to_string(line_no);
    if (fields.size() != 2) {
      throw Error(ErrorCode::kParse, where + ": expected 2 tab-separated columns, got " +
                                         std::to_string(fields.size()) + ", line " + std::to_string(line_no));
    }
    double score = 0.0;
    if (!text::parse_double(fields[1], score)) {
      throw Error(ErrorCode::kParse, where + ": non-numeric score, line " + std::to_string(line_no));
    }
    if (!(score >= kMinComplexity && score <= kMaxComplexity)) {
      throw Error(ErrorCode::kParse, where + ": score out of range, line " + std::to_string(line_no));
    }
    const std::string word(text::trim(fields[0]));
    if (word.empty()) throw Error(ErrorCode::kParse, where + ": empty word, line " + std::to_string(line_no));
    try {
      lex.insert(word, score);
    } catch (const Error&) {
      throw Error(ErrorCode::kParse, where + ": duplicate word '" + word + "', line " + std::to_string(line_no));
    }
  }
  if (lex.empty()) log().warn("lexicon {} is empty", source_name);
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open lexicon " + path.string());
  auto lex = read_lexicon(in, path.string());
  log().info("loaded lexicon {} ({} entries)", path.string(), lex.size());
  return lex;
}

void write_lexicon(std::ostream& out, const Lexicon& lexicon) {
  for (const auto& [word, score] : lexicon.sorted_entries()) {
    out << word << '\t' << text::format_double(score) << '\n';
  }
}

std::vector<RatingRecord> read_ratings(std::istream& in, const std::string& source_name) {
  std::vector<RatingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    const auto where = source_name + ":" + std::to_string(line_no);
    if (fields.size() < 2) throw Error(ErrorCode::kParse, where + ": expected word and ratings");
    RatingRecord rec;
    rec.word = std::string(text::trim(fields[0]));
    std::size_t present = 0;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto f = text::trim(fields[i]);
      if (f.empty() || f == "-") {
        rec.ratings.emplace_back(std::nullopt);
        continue;
      }
      long long r = 0;
      if (!text::parse_int(f, r) || r < 1 || r > 6) {
        throw Error(ErrorCode::kParse, where + ": rating must be an integer in 1..6");
      }
      rec.ratings.emplace_back(static_cast<int>(r));
      ++present;
    }
    if (present == 0) throw Error(ErrorCode::kParse, where + ": no ratings");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open ratings " + path.string());
  return read_ratings(in, path.string());
}

std::vector<bool> surviving_ratings(const std::vector<int>& ratings, OutlierPolicy policy) {
  const std::size_t n = ratings.size();
  std::vector<bool> keep(n, true);
  if (n < 2) return keep;
  const long long sum = std::accumulate(ratings.begin(), ratings.end(), 0LL);
  const auto others = static_cast<long long>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    // |r - (S - r)/(n-1)| compared after scaling by (n-1), exact in integers.
    const auto scaled = static_cast<double>(std::llabs(ratings[i] * others - (sum - ratings[i])));
    const double bound = policy.threshold * static_cast<double>(others);
    keep[i] = policy.inclusive ? scaled < bound : scaled <= bound;
  }
  return keep;
}

AggregationResult aggregate_ratings(const std::vector<RatingRecord>& records, OutlierPolicy policy) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "aggregate_ratings: empty record list");
  std::map<std::string, std::vector<int>> by_word;
  for (const auto& rec : records) {
    auto& dst = by_word[rec.word];
    for (const auto& r : rec.ratings) {
      if (!r) continue;
      if (*r < 1 || *r > 6) {
        throw Error(ErrorCode::kInvalidArgument, "rating out of range for '" + rec.word + "'");
      }
      dst.push_back(*r);
    }
  }
  AggregationResult result;
  for (auto& [word, ratings] : by_word) {
    if (ratings.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, "'" + word + "' needs at least 2 ratings for outlier removal");
    }
    const auto keep = surviving_ratings(ratings, policy);
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < ratings.size(); ++i) {
      if (keep[i]) {
        sum += ratings[i];
        ++kept;
      }
    }
    result.ratings_total += ratings.size();
    double score = 0.0;
    if (kept == 0) {
      score = std::accumulate(ratings.begin(), ratings.end(), 0.0) / static_cast<double>(ratings.size());
      result.flagged.push_back(word);
    } else {
      score = sum / static_cast<double>(kept);
      result.ratings_discarded += ratings.size() - kept;
    }
    result.lexicon.insert(word, score);
  }
  return result;
}

double interannotator_agreement(const std::vector<RatingRecord>& records, std::size_t annotator,
                                const OutlierPolicy* discard) {
  std::vector<double> own;
  std::vector<double> rest;
  for (const auto& rec : records) {
    if (annotator >= rec.ratings.size() || !rec.ratings[annotator]) continue;
    std::vector<int> present;
    std::size_t self = 0;
    for (std::size_t i = 0; i < rec.ratings.size(); ++i) {
      if (!rec.ratings[i]) continue;
      if (i == annotator) self = present.size();
      present.push_back(*rec.ratings[i]);
    }
    std::vector<bool> keep(present.size(), true);
    if (discard != nullptr) keep = surviving_ratings(present, *discard);
    if (!keep[self]) continue;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      if (i == self || !keep[i]) continue;
      sum += present[i];
      ++count;
    }
    if (count == 0) continue;
    own.push_back(present[self]);
    rest.push_back(sum / static_cast<double>(count));
  }
  if (own.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "annotator " + std::to_string(annotator) + " rated fewer than 2 comparable words");
  }
  return metrics::pearson(own, rest);
}

double mean_interannotator_agreement(const std::vector<RatingRecord>& records, const OutlierPolicy* discard) {
  std::size_t annotators = 0;
  for (const auto& rec : records) annotators = std::max(annotators, rec.ratings.size());
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t a = 0; a < annotators; ++a) {
    try {
      sum += interannotator_agreement(records, a, discard);
      ++defined;
    } catch (const Error&) {
      log().debug("annotator {} has undefined agreement, skipped", a);
    }
  }
  if (defined == 0) throw Error(ErrorCode::kNumeric, "undefined correlation for every annotator");
  return sum / static_cast<double>(defined);
}

}  // namespace lexsimp
