#include "lexsimp/cwi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

void CwiInstance::validate() const {
  if (!(begin < end && end <= sentence.size())) {
    throw Error(ErrorCode::kInvalidArgument, "target span [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                 ") outside a sentence of " + std::to_string(sentence.size()) +
                                                 " bytes");
  }
}

std::vector<std::string> CwiInstance::left_tokens() const {
  return text::tokenize(std::string_view(sentence).substr(0, begin));
}

std::vector<std::string> CwiInstance::right_tokens() const {
  return text::tokenize(std::string_view(sentence).substr(end));
}

namespace {

constexpr std::size_t kSemEvalColumns = 4;
constexpr std::size_t kCwigMinColumns = 10;

CwiInstance parse_semeval(const std::vector<std::string_view>& f) {
  if (f.size() != kSemEvalColumns) throw Error(ErrorCode::kParse, "expected 4 tab-separated fields");
  CwiInstance inst;
  inst.sentence = std::string(f[0]);
  long long index = 0;
  long long label = 0;
  if (!text::parse_int(text::trim(f[2]), index) || index < 0) throw Error(ErrorCode::kParse, "bad token index");
  if (!text::parse_int(text::trim(f[3]), label) || (label != 0 && label != 1)) {
    throw Error(ErrorCode::kParse, "label must be 0 or 1");
  }
  // Byte span of the index-th whitespace-separated token.
  std::size_t pos = 0;
  long long seen = -1;
  const std::string& s = inst.sentence;
  while (pos < s.size()) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size()) break;
    std::size_t stop = pos;
    while (stop < s.size() && !std::isspace(static_cast<unsigned char>(s[stop]))) ++stop;
    if (++seen == index) {
      inst.begin = pos;
      inst.end = stop;
      break;
    }
    pos = stop;
  }
  if (seen != index) throw Error(ErrorCode::kParse, "token index beyond the sentence");
  const auto word = text::trim(f[1]);
  if (inst.target() != word) {
    // Tolerate attached punctuation: find the word inside the token.
    const auto at = inst.target().find(word);
    if (word.empty() || at == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "target word does not match the token at its index");
    }
    inst.begin += at;
    inst.end = inst.begin + word.size();
  }
  inst.complex = label == 1;
  return inst;
}

CwiInstance parse_cwig3g2(const std::vector<std::string_view>& f) {
  if (f.size() < kCwigMinColumns) throw Error(ErrorCode::kParse, "expected at least 10 tab-separated fields");
  CwiInstance inst;
  inst.sentence = std::string(f[1]);
  long long start = 0;
  long long stop = 0;
  long long label = 0;
  if (!text::parse_int(text::trim(f[2]), start) || !text::parse_int(text::trim(f[3]), stop) || start < 0 ||
      stop <= start) {
    throw Error(ErrorCode::kParse, "bad target offsets");
  }
  if (!text::parse_int(text::trim(f[9]), label) || (label != 0 && label != 1)) {
    throw Error(ErrorCode::kParse, "binary label must be 0 or 1");
  }
  inst.begin = static_cast<std::size_t>(start);
  inst.end = static_cast<std::size_t>(stop);
  inst.complex = label == 1;
  inst.validate();
  if (inst.target() != text::trim(f[4])) throw Error(ErrorCode::kParse, "target text does not match its offsets");
  return inst;
}

}  // namespace

std::vector<CwiInstance> read_cwi(std::istream& in, const std::string& source_name, CwiFormat format) {
  std::vector<CwiInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, '\t');
    if (format == CwiFormat::kAuto) format = fields.size() == kSemEvalColumns ? CwiFormat::kSemEval2016 : CwiFormat::kCwig3g2;
    try {
      auto inst = format == CwiFormat::kSemEval2016 ? parse_semeval(fields) : parse_cwig3g2(fields);
      inst.validate();
      out.push_back(std::move(inst));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, source_name + ": " + e.what() + ", line " + std::to_string(line_no));
    }
  }
  return out;
}

std::vector<CwiInstance> load_cwi(const std::filesystem::path& path, CwiFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "CWI dataset not found: " + path.string());
  return read_cwi(in, path.string(), format);
}

namespace {

std::optional<double> lexicon_score(const CwiInstance& inst, const Lexicon& lexicon, const Lemmatizer* lemmatizer) {
  const auto hit = lexicon.lookup(inst.target(), lemmatizer);
  if (!hit.present) return std::nullopt;
  return hit.score;
}

}  // namespace

bool WcThresholdClassifier::predict(const CwiInstance& instance, const Lexicon& lexicon,
                                    const Lemmatizer* lemmatizer) const {
  return predict(lexicon_score(instance, lexicon, lemmatizer));
}

double threshold_g_score(const std::vector<std::pair<double, bool>>& points, double threshold) {
  if (points.empty()) return 0.0;
  std::size_t correct = 0;
  std::size_t complex = 0;
  std::size_t hits = 0;
  for (const auto& [score, is_complex] : points) {
    const bool pred = score >= threshold;
    if (pred == is_complex) ++correct;
    if (is_complex) {
      ++complex;
      if (pred) ++hits;
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(points.size());
  const double recall = complex ? static_cast<double>(hits) / static_cast<double>(complex) : 0.0;
  return metrics::g_score(accuracy, recall);
}

WcThresholdClassifier cwi_wc_only(const std::vector<CwiInstance>& train, const Lexicon& lexicon,
                                  const Lemmatizer* lemmatizer) {
  std::vector<std::pair<double, bool>> points;
  for (const auto& inst : train) {
    if (const auto s = lexicon_score(inst, lexicon, lemmatizer)) points.emplace_back(*s, inst.complex);
  }
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "no training word is covered by the lexicon");
  if (points.size() < train.size()) {
    log().info("{} of {} training instance(s) are not in the lexicon", train.size() - points.size(), train.size());
  }
  std::set<double> distinct;
  bool any_complex = false;
  bool any_simple = false;
  for (const auto& [s, c] : points) {
    distinct.insert(s);
    (c ? any_complex : any_simple) = true;
  }
  WcThresholdClassifier clf;
  if (!any_complex || !any_simple) {
    clf.degenerate = true;
    clf.threshold = any_complex ? *distinct.begin() : *distinct.rbegin() + 1.0;
    log().warn("CWI training data has a single class; threshold {} is degenerate", clf.threshold);
    return clf;
  }
  std::vector<double> cuts{*distinct.begin()};
  for (auto it = distinct.begin(), nx = std::next(it); nx != distinct.end(); ++it, ++nx) cuts.push_back((*it + *nx) / 2);
  cuts.push_back(*distinct.rbegin() + 1.0);
  double best = -1.0;
  for (double t : cuts) {
    const double g = threshold_g_score(points, t);
    if (g > best) {
      best = g;
      clf.threshold = t;
    }
  }
  return clf;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

const std::set<std::string, std::less<>>& closed_class() {
  static const std::set<std::string, std::less<>> words{
      "a", "an", "the", "this", "that", "these", "those", "and", "or", "but", "if", "of", "in", "on", "at",
      "to", "for", "with", "by", "from", "as", "into", "about", "over", "under", "i", "you", "he", "she", "it",
      "we", "they", "me", "him", "her", "us", "them", "my", "your", "his", "its", "our", "their", "is", "are",
      "was", "were", "be", "been", "being", "not", "no", "so", "than", "then", "there", "who", "which", "what"};
  return words;
}

}  // namespace

std::string HeuristicPosTagger::tag(const std::vector<std::string>& tokens, std::size_t index) const {
  if (index >= tokens.size()) throw Error(ErrorCode::kInvalidArgument, "tag index outside the sentence");
  const auto w = text::to_lower(tokens[index]);
  if (closed_class().count(w)) return "OTHER";
  if (ends_with(w, "ly")) return "ADV";
  for (auto suf : {"ing", "ed", "ize", "ise", "ify", "ate"}) {
    if (ends_with(w, suf)) return "VERB";
  }
  for (auto suf : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"}) {
    if (ends_with(w, suf)) return "ADJ";
  }
  if (index > 0) {
    const auto prev = text::to_lower(tokens[index - 1]);
    if (prev == "to" || prev == "will" || prev == "can" || prev == "would" || prev == "should") return "VERB";
  }
  return "NOUN";
}

void SenseInventory::add(std::string word, int senses) {
  if (senses < 1) throw Error(ErrorCode::kInvalidArgument, "sense count must be >= 1 for '" + word + "'");
  counts_[text::to_lower(word)] = senses;
}

int SenseInventory::senses(std::string_view word) const {
  const auto it = counts_.find(text::to_lower(word));
  return it == counts_.end() ? 1 : it->second;
}

SenseInventory read_sense_inventory(std::istream& in, const std::string& source_name) {
  SenseInventory inv;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line[0] == '#') continue;
    const auto f = text::split(line, '\t');
    long long n = 0;
    if (f.size() != 2 || !text::parse_int(text::trim(f[1]), n) || n < 1) {
      throw Error(ErrorCode::kParse, source_name + ": expected word<TAB>senses, line " + std::to_string(line_no));
    }
    inv.add(std::string(text::trim(f[0])), static_cast<int>(n));
  }
  return inv;
}

SenseInventory load_sense_inventory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "sense inventory not found: " + path.string());
  return read_sense_inventory(in, path.string());
}

namespace {

const std::array<std::string_view, 5> kPosTags{"NOUN", "VERB", "ADJ", "ADV", "OTHER"};

}  // namespace

CwiFeaturizer::CwiFeaturizer(CwiFeatureConfig config, CwiResources resources)
    : config_(config), res_(resources) {
  auto need = [](const void* p, const char* what) {
    if (p == nullptr) throw Error(ErrorCode::kMissingResource, std::string("CWI features need ") + what);
  };
  if (config_.senses) need(res_.senses, "a sense inventory");
  if (config_.cosine) need(res_.embeddings, "word embeddings");
  if (config_.frequency) need(res_.ngram_frequency, "an n-gram frequency table");
  if (config_.wc) need(res_.lexicon, "the word-complexity lexicon");

  if (config_.length) names_.insert(names_.end(), {"tokens", "chars"});
  if (config_.senses) names_.push_back("senses");
  if (config_.pos) {
    for (auto t : kPosTags) names_.push_back("pos_" + text::to_lower(t));
  }
  if (config_.cosine) names_.push_back("context_cosine");
  if (config_.frequency) names_.push_back("ngram_logfreq");
  if (config_.wc) names_.insert(names_.end(), {"lex_present", "lex_score"});
  if (names_.empty()) throw Error(ErrorCode::kInvalidArgument, "no CWI features enabled");
}

std::vector<double> CwiFeaturizer::features(const CwiInstance& inst) const {
  inst.validate();
  const auto target = inst.target();
  const auto target_tokens = text::tokenize(target);
  std::vector<double> out;
  out.reserve(names_.size());
  if (config_.length) {
    out.push_back(static_cast<double>(target_tokens.size()));
    out.push_back(static_cast<double>(target.size()));
  }
  if (config_.senses) {
    // Multi-word targets take the mean over their words.
    double sum = 0.0;
    for (const auto& t : target_tokens) sum += res_.senses->senses(t);
    out.push_back(target_tokens.empty() ? 1.0 : sum / static_cast<double>(target_tokens.size()));
  }
  if (config_.pos) {
    auto left = inst.left_tokens();
    const std::size_t index = left.size();
    std::vector<std::string> tokens = std::move(left);
    tokens.push_back(target_tokens.empty() ? std::string(target) : target_tokens.back());
    const PosTagger& tagger = res_.tagger ? *res_.tagger : default_tagger_;
    const auto tag = tagger.tag(tokens, index);
    bool matched = false;
    for (auto t : kPosTags) {
      const bool on = tag == t;
      matched = matched || on;
      out.push_back(on ? 1.0 : 0.0);
    }
    if (!matched) out.back() = 1.0;
  }
  if (config_.cosine) {
    const auto target_vec = phrase_embedding(*res_.embeddings, target);
    auto rest = inst.left_tokens();
    const auto right = inst.right_tokens();
    rest.insert(rest.end(), right.begin(), right.end());
    const auto context_vec = phrase_embedding(*res_.embeddings, text::join(rest, " "));
    out.push_back(cosine(target_vec.vector, context_vec.vector));
  }
  if (config_.frequency) out.push_back(log_frequency(*res_.ngram_frequency, target));
  if (config_.wc) {
    const auto hit = res_.lexicon->lookup(target, res_.lemmatizer);
    out.push_back(hit.present ? 1.0 : 0.0);
    out.push_back(hit.present ? hit.score : 0.0);
  }
  return out;
}

NearestCentroid NearestCentroid::fit(const std::vector<std::vector<double>>& rows, const std::vector<bool>& complex) {
  if (rows.size() != complex.size()) throw Error(ErrorCode::kInvalidArgument, "one label per row required");
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  const std::size_t dim = rows.front().size();
  NearestCentroid nc;
  nc.mean_.assign(dim, 0.0);
  nc.scale_.assign(dim, 0.0);
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorCode::kInvalidArgument, "feature rows differ in length");
    for (std::size_t d = 0; d < dim; ++d) nc.mean_[d] += r[d];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : nc.mean_) m /= n;
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) nc.scale_[d] += (r[d] - nc.mean_[d]) * (r[d] - nc.mean_[d]);
  }
  for (auto& s : nc.scale_) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
  nc.simple_.assign(dim, 0.0);
  nc.complex_.assign(dim, 0.0);
  std::size_t n_complex = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto z = nc.standardize(rows[i]);
    auto& c = complex[i] ? nc.complex_ : nc.simple_;
    for (std::size_t d = 0; d < dim; ++d) c[d] += z[d];
    n_complex += complex[i] ? 1 : 0;
  }
  const std::size_t n_simple = rows.size() - n_complex;
  if (n_complex == 0 || n_simple == 0) {
    throw Error(ErrorCode::kInvalidArgument, std::string("no training instance of class ") +
                                                 (n_complex == 0 ? "complex" : "simple"));
  }
  for (auto& v : nc.complex_) v /= static_cast<double>(n_complex);
  for (auto& v : nc.simple_) v /= static_cast<double>(n_simple);
  return nc;
}

std::vector<double> NearestCentroid::standardize(const std::vector<double>& row) const {
  std::vector<double> z(row.size());
  for (std::size_t d = 0; d < row.size(); ++d) z[d] = (row[d] - mean_[d]) / scale_[d];
  return z;
}

bool NearestCentroid::predict(const std::vector<double>& row) const {
  if (row.size() != mean_.size()) throw Error(ErrorCode::kInvalidArgument, "feature row has the wrong length");
  const auto z = standardize(row);
  double ds = 0.0;
  double dc = 0.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    ds += (z[d] - simple_[d]) * (z[d] - simple_[d]);
    dc += (z[d] - complex_[d]) * (z[d] - complex_[d]);
  }
  return dc < ds;
}

CwiNearestCentroid cwi_nearest_centroid(const std::vector<CwiInstance>& train, CwiFeatureConfig config,
                                        const CwiResources& resources) {
  CwiFeaturizer featurizer(config, resources);
  std::vector<std::vector<double>> rows;
  std::vector<bool> labels;
  rows.reserve(train.size());
  for (const auto& inst : train) {
    rows.push_back(featurizer.features(inst));
    labels.push_back(inst.complex);
  }
  auto clf = NearestCentroid::fit(rows, labels);
  return CwiNearestCentroid{std::move(featurizer), std::move(clf)};
}

metrics::EvalReport cwi_report(const std::vector<bool>& predicted, const std::vector<bool>& gold) {
  std::vector<int> p(predicted.begin(), predicted.end());
  std::vector<int> g(gold.begin(), gold.end());
  const auto cr = metrics::class_precisions(p, g, {0, 1}, 1);
  const auto& complex = cr.per_class.at(1);
  metrics::EvalReport report;
  report.task = "cwi";
  report.instances = predicted.size();
  report.add("accuracy", cr.accuracy);
  report.add("precision", complex.precision);
  report.add("recall", complex.recall);
  report.add("f1", cr.f1);
  report.add("g_score", metrics::g_score(cr.accuracy, complex.recall));
  return report;
}

}  // namespace lexsimp
