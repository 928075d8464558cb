#include "lexsimp/ranking.hpp"

#include <algorithm>
#include <fstream>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

void RankingInstance::validate() const {
  if (candidates.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ranking instance needs at least 2 candidates");
  if (ranks.size() != candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ranking instance has " + std::to_string(ranks.size()) + " ranks for " +
                                                 std::to_string(candidates.size()) + " candidates");
  }
  if (!sentence.empty() && target >= sentence.size()) {
    throw Error(ErrorCode::kInvalidArgument, "target position outside the sentence");
  }
}

Context RankingInstance::context() const {
  Context ctx;
  if (sentence.empty()) return ctx;
  const std::size_t lo = target >= 2 ? target - 2 : 0;
  ctx.left.assign(sentence.begin() + static_cast<std::ptrdiff_t>(lo),
                  sentence.begin() + static_cast<std::ptrdiff_t>(target));
  const std::size_t hi = std::min(sentence.size(), target + 3);
  ctx.right.assign(sentence.begin() + static_cast<std::ptrdiff_t>(target + 1),
                   sentence.begin() + static_cast<std::ptrdiff_t>(hi));
  return ctx;
}

metrics::GoldRanking RankingInstance::gold() const { return {candidates, ranks}; }

std::vector<RankingPair> build_ranking_pairs(const std::vector<RankingInstance>& instances) {
  std::vector<RankingPair> pairs;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& inst = instances[k];
    inst.validate();
    for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < inst.candidates.size(); ++j) {
        const double d = static_cast<double>(inst.ranks[i] - inst.ranks[j]);
        pairs.push_back({k, i, j, d});
        pairs.push_back({k, j, i, -d});
      }
    }
  }
  return pairs;
}

namespace {

struct CandidateSides {
  std::vector<std::vector<double>> sides;
  std::vector<PhraseEmbedding> embeddings;
};

CandidateSides extract_sides(const FeatureExtractor& extractor, const RankingInstance& inst) {
  const Context ctx = inst.context();
  const Context* ctx_ptr = inst.sentence.empty() ? nullptr : &ctx;
  const bool embed = extractor.schema().pair_vector() != nullptr || !extractor.schema().pair_scalars().empty();
  CandidateSides out;
  for (const auto& c : inst.candidates) {
    out.sides.push_back(extractor.extract_single(c, ctx_ptr));
    if (embed) out.embeddings.push_back(extractor.embed(c));
  }
  return out;
}

PairFeatures pair_of(const FeatureExtractor& extractor, const CandidateSides& s, std::size_t a, std::size_t b) {
  const PhraseEmbedding* ea = s.embeddings.empty() ? nullptr : &s.embeddings[a];
  const PhraseEmbedding* eb = s.embeddings.empty() ? nullptr : &s.embeddings[b];
  return extractor.combine(s.sides[a], s.sides[b], ea, eb);
}

}  // namespace

std::vector<LabeledPair> ranking_training_set(const FeatureExtractor& extractor,
                                              const std::vector<RankingInstance>& instances) {
  const auto pairs = build_ranking_pairs(instances);
  std::vector<LabeledPair> out;
  out.reserve(pairs.size());
  std::size_t cached = instances.size();
  CandidateSides sides;
  for (const auto& p : pairs) {
    if (p.instance != cached) {
      sides = extract_sides(extractor, instances[p.instance]);
      cached = p.instance;
    }
    out.push_back({pair_of(extractor, sides, p.a, p.b), p.label});
  }
  return out;
}

std::vector<RankedCandidate> rank_by_pairwise(const std::vector<std::string>& candidates, const PairScore& score) {
  if (candidates.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ranking needs at least 2 candidates");
  std::vector<RankedCandidate> ranked(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ranked[i].text = candidates[i];
    ranked[i].index = i;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j != i) ranked[i].score += score(i, j);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate& x, const RankedCandidate& y) {
    if (x.score != y.score) return x.score < y.score;
    return x.text < y.text;
  });
  return ranked;
}

std::vector<RankedCandidate> rank_candidates(const NRRModel& model, const FeatureExtractor& extractor,
                                             const RankingInstance& instance) {
  if (instance.candidates.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ranking needs at least 2 candidates");
  const auto sides = extract_sides(extractor, instance);
  return rank_by_pairwise(instance.candidates, [&](std::size_t i, std::size_t j) {
    return model.predict(pair_of(extractor, sides, i, j));
  });
}

std::vector<RankingInstance> read_ranking_instances(std::istream& in, const std::string& source_name) {
  std::vector<RankingInstance> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::kParse, source_name + ": " + msg + ", line " + std::to_string(line_no));
  };
  while (read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 5) fail("expected sentence, target, position and at least 2 candidates");
    RankingInstance inst;
    inst.sentence = text::split_whitespace(fields[0]);
    long long pos = 0;
    if (!text::parse_int(text::trim(fields[2]), pos) || pos < 0) fail("bad target position");
    inst.target = static_cast<std::size_t>(pos);
    for (std::size_t f = 3; f < fields.size(); ++f) {
      const auto field = text::trim(fields[f]);
      if (field.empty()) continue;
      const auto colon = field.find(':');
      long long rank = 0;
      if (colon == std::string_view::npos || !text::parse_int(field.substr(0, colon), rank) || rank < 1) {
        fail("bad candidate field '" + std::string(field) + "'");
      }
      const auto cand = text::trim(field.substr(colon + 1));
      if (cand.empty()) fail("empty candidate");
      inst.candidates.emplace_back(cand);
      inst.ranks.push_back(static_cast<int>(rank));
    }
    try {
      inst.validate();
    } catch (const Error& e) {
      fail(e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<RankingInstance> load_ranking_instances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "ranking dataset not found: " + path.string());
  return read_ranking_instances(in, path.string());
}

RankingEvaluation evaluate_ranking(const NRRModel& model, const FeatureExtractor& extractor,
                                   const std::vector<RankingInstance>& instances) {
  RankingEvaluation out;
  std::vector<std::vector<std::string>> predicted;
  std::vector<metrics::GoldRanking> gold;
  for (const auto& inst : instances) {
    out.rankings.push_back(rank_candidates(model, extractor, inst));
    std::vector<std::string> order;
    for (const auto& r : out.rankings.back()) order.push_back(r.text);
    predicted.push_back(std::move(order));
    gold.push_back(inst.gold());
  }
  out.report.task = "rank";
  out.report.instances = instances.size();
  out.report.add("p_at_1", metrics::precision_at_1(predicted, gold));
  out.report.add("pearson", metrics::ranking_pearson(predicted, gold));
  return out;
}

}  // namespace lexsimp
