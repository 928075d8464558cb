#include "lexsimp/ppdb.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

std::string_view to_string(RuleClass c) {
  switch (c) {
    case RuleClass::kComplicating: return "complicating";
    case RuleClass::kNoDifference: return "no-difference";
    case RuleClass::kSimplifying: return "simplifying";
  }
  return "no-difference";
}

std::optional<RuleClass> parse_rule_class(std::string_view s) {
  if (s == "complicating" || s == "-1") return RuleClass::kComplicating;
  if (s == "no-difference" || s == "0") return RuleClass::kNoDifference;
  if (s == "simplifying" || s == "1" || s == "+1") return RuleClass::kSimplifying;
  return std::nullopt;
}

RuleClass classify_score(double yhat, const ClassThresholds& thresholds) {
  if (yhat < thresholds.lower) return RuleClass::kComplicating;
  if (yhat > thresholds.upper) return RuleClass::kSimplifying;
  return RuleClass::kNoDifference;
}

PpdbColumns PpdbColumns::parse(std::string_view spec) {
  const auto parts = text::split(spec, ',');
  if (parts.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "column map needs 4 comma-separated indices: category,source,target,quality");
  }
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    long long x = 0;
    if (!text::parse_int(text::trim(parts[i]), x) || x < -1 || (i < 3 && x < 0)) {
      throw Error(ErrorCode::kInvalidArgument, "bad column index '" + std::string(parts[i]) + "'");
    }
    v[i] = static_cast<int>(x);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (v[i] >= 0 && v[i] == v[j]) throw Error(ErrorCode::kInvalidArgument, "column map repeats index " + std::to_string(v[i]));
    }
  }
  return {v[0], v[1], v[2], v[3]};
}

namespace {

std::optional<double> parse_quality(std::string_view field) {
  field = text::trim(field);
  double q = 0.0;
  if (text::parse_double(field, q)) return q;
  constexpr std::string_view kKey = "PPDB2.0Score=";
  for (const auto& tok : text::split_whitespace(field)) {
    if (tok.rfind(kKey, 0) == 0 && text::parse_double(std::string_view(tok).substr(kKey.size()), q)) return q;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ParaphraseRule> parse_ppdb_line(std::string_view line, const PpdbColumns& columns) {
  const auto fields = text::split(line, std::string_view("|||"));
  const int needed = std::max({columns.category, columns.source, columns.target, columns.quality}) + 1;
  if (static_cast<int>(fields.size()) < needed) return std::nullopt;
  ParaphraseRule rule;
  rule.category = std::string(text::trim(fields[static_cast<std::size_t>(columns.category)]));
  rule.source = std::string(text::trim(fields[static_cast<std::size_t>(columns.source)]));
  rule.target = std::string(text::trim(fields[static_cast<std::size_t>(columns.target)]));
  if (rule.source.empty() || rule.target.empty()) return std::nullopt;
  if (rule.category.find('\t') != std::string::npos || rule.source.find('\t') != std::string::npos ||
      rule.target.find('\t') != std::string::npos) {
    return std::nullopt;
  }
  if (columns.quality >= 0) {
    rule.quality = parse_quality(fields[static_cast<std::size_t>(columns.quality)]);
    if (!rule.quality) return std::nullopt;
  }
  return rule;
}

std::vector<LabeledRule> read_labeled_rules(std::istream& in, const std::string& source_name) {
  std::vector<LabeledRule> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line[0] == '#') continue;
    const auto f = text::split(line, '\t');
    std::optional<RuleClass> label;
    if (f.size() == 3) label = parse_rule_class(text::trim(f[2]));
    if (!label || text::trim(f[0]).empty() || text::trim(f[1]).empty()) {
      throw Error(ErrorCode::kParse,
                  source_name + ": expected source, target and label in {-1,0,1}, line " + std::to_string(line_no));
    }
    out.push_back({std::string(text::trim(f[0])), std::string(text::trim(f[1])), *label});
  }
  return out;
}

std::vector<LabeledRule> load_labeled_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "labelled rule file not found: " + path.string());
  return read_labeled_rules(in, path.string());
}

std::vector<LabeledPair> ppdb_training_set(const FeatureExtractor& extractor, const std::vector<LabeledRule>& rules) {
  std::vector<LabeledPair> out;
  out.reserve(rules.size());
  for (const auto& r : rules) {
    out.push_back({extractor.extract_pair(r.source, r.target), static_cast<double>(static_cast<int>(r.label))});
  }
  return out;
}

RuleScorer nrr_rule_scorer(const NRRModel& model, const FeatureExtractor& extractor) {
  return [&model, &extractor](const ParaphraseRule& rule) {
    return std::clamp(model.predict(extractor.extract_pair(rule.source, rule.target)), -1.0, 1.0);
  };
}

namespace {

constexpr std::size_t kMalformedWarnings = 10;

struct ScoredLine {
  std::string row;
  /// class + 1, or -1 for a malformed line, -2 for a blank one.
  int slot = -2;
};

std::string format_row(const ParaphraseRule& rule, double yhat, RuleClass cls) {
  std::string row;
  row.reserve(rule.category.size() + rule.source.size() + rule.target.size() + 48);
  row += rule.category;
  row += '\t';
  row += rule.source;
  row += '\t';
  row += rule.target;
  row += '\t';
  row += text::format_double(yhat);
  row += '\t';
  row += to_string(cls);
  row += '\t';
  if (rule.quality) row += text::format_double(*rule.quality);
  row += '\n';
  return row;
}

void score_range(const RuleScorer& scorer, const SimplePpdbOptions& options, const std::vector<std::string>& lines,
                 std::vector<ScoredLine>& results, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    if (text::trim(lines[i]).empty()) {
      results[i].slot = -2;
      continue;
    }
    const auto rule = parse_ppdb_line(lines[i], options.columns);
    if (!rule) {
      results[i].slot = -1;
      continue;
    }
    const double yhat = scorer(*rule);
    if (!std::isfinite(yhat)) throw Error(ErrorCode::kNumeric, "non-finite score for rule '" + rule->source + "'");
    const RuleClass cls = classify_score(yhat, options.thresholds);
    results[i].slot = static_cast<int>(cls) + 1;
    results[i].row = format_row(*rule, yhat, cls);
  }
}

/// Scores a chunk, in parallel when jobs > 1, keeping input order.
std::vector<ScoredLine> score_chunk(const RuleScorer& scorer, const SimplePpdbOptions& options,
                                    const std::vector<std::string>& lines) {
  std::vector<ScoredLine> results(lines.size());
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, lines.size()));
  if (jobs <= 1) {
    score_range(scorer, options, lines, results, 0, lines.size());
    return results;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    const std::size_t begin = lines.size() * t / jobs;
    const std::size_t end = lines.size() * (t + 1) / jobs;
    workers.emplace_back([&, t, begin, end] {
      try {
        score_range(scorer, options, lines, results, begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Reads up to `limit` lines, counting the raw bytes consumed.
std::size_t read_chunk(std::istream& in, std::size_t limit, std::vector<std::string>& lines, std::uint64_t& bytes) {
  lines.clear();
  std::string line;
  while (lines.size() < limit && std::getline(in, line)) {
    bytes += line.size() + (in.eof() ? 0 : 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines.size();
}

void tally(const std::vector<ScoredLine>& results, std::uint64_t first_line, SimplePpdbStats& stats,
           std::ostream& out) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    ++stats.lines;
    const auto& r = results[i];
    if (r.slot == -2) continue;
    if (r.slot == -1) {
      if (++stats.malformed <= kMalformedWarnings) {
        log().warn("skipping malformed rule at line {}", first_line + i + 1);
      }
      continue;
    }
    ++stats.scored;
    ++stats.classes[static_cast<std::size_t>(r.slot)];
    out << r.row;
  }
}

std::size_t next_chunk_size(const SimplePpdbOptions& options, std::uint64_t lines_done) {
  std::size_t n = std::max<std::size_t>(1, options.chunk_size);
  if (options.stop_after) {
    if (lines_done >= *options.stop_after) return 0;
    n = static_cast<std::size_t>(std::min<std::uint64_t>(n, *options.stop_after - lines_done));
  }
  return n;
}

void finish_log(const SimplePpdbStats& stats) {
  if (stats.malformed > 0) log().warn("skipped {} malformed rule line(s)", stats.malformed);
}

struct Checkpoint {
  SimplePpdbStats stats;
  std::uint64_t input_offset = 0;
  std::uint64_t output_bytes = 0;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::ostringstream body;
  body << "lexsimp-checkpoint 1\n"
       << "lines " << cp.stats.lines << '\n'
       << "input_offset " << cp.input_offset << '\n'
       << "output_bytes " << cp.output_bytes << '\n'
       << "scored " << cp.stats.scored << '\n'
       << "malformed " << cp.stats.malformed << '\n'
       << "complicating " << cp.stats.classes[0] << '\n'
       << "no_difference " << cp.stats.classes[1] << '\n'
       << "simplifying " << cp.stats.classes[2] << '\n'
       << "completed " << (cp.stats.completed ? 1 : 0) << '\n';
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + tmp.string());
    out << body.str();
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "checkpoint not found: " + path.string());
  std::string line;
  if (!read_line(in, line) || line != "lexsimp-checkpoint 1") {
    throw Error(ErrorCode::kParse, path.string() + ": not a checkpoint file");
  }
  std::map<std::string, std::uint64_t> values;
  while (read_line(in, line)) {
    const auto f = text::split_whitespace(line);
    long long v = 0;
    if (f.size() != 2 || !text::parse_int(f[1], v) || v < 0) {
      throw Error(ErrorCode::kParse, path.string() + ": bad checkpoint line '" + line + "'");
    }
    values[f[0]] = static_cast<std::uint64_t>(v);
  }
  auto get = [&](const char* key) {
    const auto it = values.find(key);
    if (it == values.end()) throw Error(ErrorCode::kParse, path.string() + ": checkpoint lacks '" + key + "'");
    return it->second;
  };
  Checkpoint cp;
  cp.stats.lines = get("lines");
  cp.input_offset = get("input_offset");
  cp.output_bytes = get("output_bytes");
  cp.stats.scored = get("scored");
  cp.stats.malformed = get("malformed");
  cp.stats.classes = {get("complicating"), get("no_difference"), get("simplifying")};
  cp.stats.completed = get("completed") != 0;
  return cp;
}

}  // namespace

SimplePpdbStats build_simpleppdb(const RuleScorer& scorer, std::istream& in, std::ostream& out,
                                 const SimplePpdbOptions& options) {
  SimplePpdbStats stats;
  std::vector<std::string> lines;
  std::uint64_t bytes = 0;
  for (;;) {
    const std::size_t want = next_chunk_size(options, stats.lines);
    if (want == 0) break;
    if (read_chunk(in, want, lines, bytes) == 0) {
      stats.completed = true;
      break;
    }
    tally(score_chunk(scorer, options, lines), stats.lines, stats, out);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed to write scored rules");
  finish_log(stats);
  return stats;
}

SimplePpdbStats build_simpleppdb(const RuleScorer& scorer, const std::filesystem::path& input,
                                 const std::filesystem::path& output, const SimplePpdbOptions& options) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "rule file not found: " + input.string());

  Checkpoint cp;
  const bool resuming = options.resume && options.checkpoint && std::filesystem::exists(*options.checkpoint);
  if (resuming) {
    cp = read_checkpoint(*options.checkpoint);
    if (!std::filesystem::exists(output) || std::filesystem::file_size(output) < cp.output_bytes) {
      throw Error(ErrorCode::kSchemaMismatch, "output " + output.string() + " is shorter than its checkpoint");
    }
    if (cp.stats.completed) {
      log().info("checkpoint says the run already completed; nothing to do");
      return cp.stats;
    }
    std::filesystem::resize_file(output, cp.output_bytes);
    in.seekg(static_cast<std::streamoff>(cp.input_offset));
    if (!in) throw Error(ErrorCode::kSchemaMismatch, "checkpoint input offset lies beyond " + input.string());
    log().info("resuming after {} line(s)", cp.stats.lines);
  }
  std::ofstream out(output, std::ios::binary | (resuming ? std::ios::app : std::ios::trunc));
  if (!out) throw Error(ErrorCode::kIo, "cannot open output: " + output.string());

  std::vector<std::string> lines;
  for (;;) {
    const std::size_t want = next_chunk_size(options, cp.stats.lines);
    if (want == 0) break;
    if (read_chunk(in, want, lines, cp.input_offset) == 0) {
      cp.stats.completed = true;
      break;
    }
    std::ostringstream rows;
    tally(score_chunk(scorer, options, lines), cp.stats.lines, cp.stats, rows);
    const std::string block = rows.str();
    out.write(block.data(), static_cast<std::streamsize>(block.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "failed to write " + output.string());
    cp.output_bytes += block.size();
    if (options.checkpoint) write_checkpoint(*options.checkpoint, cp);
  }
  if (options.checkpoint) write_checkpoint(*options.checkpoint, cp);
  finish_log(cp.stats);
  return cp.stats;
}

std::optional<ScoredRule> parse_scored_rule(std::string_view line) {
  const auto f = text::split(line, '\t');
  if (f.size() < 5 || f.size() > 6) return std::nullopt;
  ScoredRule r;
  r.category = std::string(f[0]);
  r.source = std::string(f[1]);
  r.target = std::string(f[2]);
  if (r.source.empty() || r.target.empty() || !text::parse_double(f[3], r.yhat)) return std::nullopt;
  const auto cls = parse_rule_class(f[4]);
  if (!cls) return std::nullopt;
  r.cls = *cls;
  if (f.size() == 6 && !f[5].empty()) {
    double q = 0.0;
    if (!text::parse_double(f[5], q)) return std::nullopt;
    r.quality = q;
  }
  return r;
}

std::vector<ScoredRule> read_simpleppdb(std::istream& in, const std::string& source_name) {
  std::vector<ScoredRule> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto r = parse_scored_rule(line);
    if (!r) throw Error(ErrorCode::kParse, source_name + ": malformed scored rule, line " + std::to_string(line_no));
    out.push_back(std::move(*r));
  }
  return out;
}

std::vector<ScoredRule> load_simpleppdb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "scored rule file not found: " + path.string());
  return read_simpleppdb(in, path.string());
}

SubstitutionIndex::SubstitutionIndex(std::vector<ScoredRule> rules) : size_(rules.size()) {
  for (auto& r : rules) {
    auto key = text::to_lower(r.source);
    by_source_[std::move(key)].push_back(std::move(r));
  }
}

const std::vector<ScoredRule>& SubstitutionIndex::rules_for(std::string_view source) const {
  static const std::vector<ScoredRule> kNone;
  const auto it = by_source_.find(text::to_lower(source));
  return it == by_source_.end() ? kNone : it->second;
}

namespace {

std::string_view strip_brackets(std::string_view c) {
  c = text::trim(c);
  if (c.size() >= 2 && c.front() == '[' && c.back() == ']') c = c.substr(1, c.size() - 2);
  return c;
}

}  // namespace

std::vector<Substitution> generate_substitutions(std::string_view target, std::string_view category,
                                                 const SubstitutionIndex& index, const GenerationConfig& config) {
  const bool phrase = text::split_whitespace(target).size() > 1;
  const double min_quality = phrase ? config.phrase_quality : config.word_quality;
  const auto want_category = strip_brackets(category);
  const auto target_lower = text::to_lower(target);

  std::map<std::string, Substitution> best;
  for (const auto& r : index.rules_for(target)) {
    if (!r.quality || *r.quality < min_quality) continue;
    if (!want_category.empty() && strip_brackets(r.category) != want_category) continue;
    if (text::to_lower(r.target) == target_lower) continue;
    Substitution s{r.target, r.yhat, *r.quality, r.category};
    auto [it, inserted] = best.try_emplace(r.target, s);
    if (!inserted) {
      auto& cur = it->second;
      if (std::tie(s.yhat, s.quality, cur.category) > std::tie(cur.yhat, cur.quality, s.category)) cur = s;
    }
  }
  std::vector<Substitution> out;
  out.reserve(best.size());
  for (auto& [text, s] : best) out.push_back(std::move(s));
  std::stable_sort(out.begin(), out.end(), [](const Substitution& a, const Substitution& b) {
    if (a.yhat != b.yhat) return a.yhat > b.yhat;
    return a.text < b.text;
  });
  return out;
}

}  // namespace lexsimp
