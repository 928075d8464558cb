#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lexsimp/error.hpp"
#include "lexsimp/ppdb.hpp"
#include "lexsimp/text.hpp"
#include "support.hpp"

namespace lexsimp {
namespace {

using testing::read_file;
using testing::TempDir;

/// Deterministic stand-in for a trained model: longer source than target
/// reads as simplifying.
double length_scorer(const ParaphraseRule& r) {
  return std::tanh(0.2 * (static_cast<double>(r.source.size()) - static_cast<double>(r.target.size())));
}

TEST(ClassifyScore, ThresholdTable) {
  const std::vector<std::pair<double, RuleClass>> cases{
      {-1.0, RuleClass::kComplicating},  {-0.401, RuleClass::kComplicating}, {-0.4, RuleClass::kNoDifference},
      {0.0, RuleClass::kNoDifference},   {0.4, RuleClass::kNoDifference},    {0.401, RuleClass::kSimplifying},
      {1.0, RuleClass::kSimplifying},    {-0.5, RuleClass::kComplicating},   {0.45, RuleClass::kSimplifying},
  };
  for (const auto& [y, cls] : cases) EXPECT_EQ(classify_score(y), cls) << y;
}

TEST(ClassifyScore, MonotoneInScore) {
  Rng rng(101);
  for (int trial = 0; trial < 10000; ++trial) {
    double a = rng.uniform(-1.5, 1.5), b = rng.uniform(-1.5, 1.5);
    if (a > b) std::swap(a, b);
    ASSERT_LE(static_cast<int>(classify_score(a)), static_cast<int>(classify_score(b)));
  }
}

TEST(RuleClass, NamesRoundTrip) {
  for (auto c : {RuleClass::kComplicating, RuleClass::kNoDifference, RuleClass::kSimplifying}) {
    EXPECT_EQ(parse_rule_class(to_string(c)), c);
  }
  EXPECT_EQ(parse_rule_class("+1"), RuleClass::kSimplifying);
  EXPECT_EQ(parse_rule_class("-1"), RuleClass::kComplicating);
  EXPECT_EQ(parse_rule_class("0"), RuleClass::kNoDifference);
  EXPECT_FALSE(parse_rule_class("2").has_value());
}

TEST(PpdbLine, ParsesQualityFormats) {
  const auto a = parse_ppdb_line("[VB] ||| commence ||| start ||| PPDB2.0Score=3.71 PPDB1.0Score=1.2");
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(a->category, "[VB]");
  EXPECT_EQ(a->source, "commence");
  EXPECT_EQ(a->target, "start");
  EXPECT_EQ(a->quality, 3.71);
  const auto b = parse_ppdb_line("[NN] ||| abode ||| home ||| 4.5");
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->quality, 4.5);
  EXPECT_FALSE(parse_ppdb_line("[NN] ||| broken line without target").has_value());
  EXPECT_FALSE(parse_ppdb_line("[NN] ||| a ||| b ||| notanumber").has_value());
  EXPECT_FALSE(parse_ppdb_line("[NN] |||  ||| b ||| 3").has_value());
}

TEST(PpdbLine, CustomColumnMap) {
  const auto cols = PpdbColumns::parse("2,0,1,-1");
  const auto r = parse_ppdb_line("source ||| target ||| [JJ]", cols);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->category, "[JJ]");
  EXPECT_EQ(r->source, "source");
  EXPECT_FALSE(r->quality.has_value());
  EXPECT_THROW(PpdbColumns::parse("0,1"), Error);
  EXPECT_THROW(PpdbColumns::parse("0,0,1,2"), Error);
}

TEST(LabeledRules, Reader) {
  std::istringstream in("utilize\tuse\t1\nuse\tutilize\t-1\ncar\tvehicle\t0\n");
  const auto rules = read_labeled_rules(in, "fixture");
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[0].label, RuleClass::kSimplifying);
  EXPECT_EQ(rules[1].label, RuleClass::kComplicating);
  std::istringstream bad("a\tb\t7\n");
  EXPECT_THROW(read_labeled_rules(bad, "fixture"), Error);
}

SimplePpdbStats run_stream(const std::string& input, std::string& output, const SimplePpdbOptions& opt) {
  std::istringstream in(input);
  std::ostringstream out;
  const auto stats = build_simpleppdb(length_scorer, in, out, opt);
  output = out.str();
  return stats;
}

TEST(SimplePpdb, EmptyStream) {
  std::string out;
  const auto stats = run_stream("", out, {});
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(stats.lines, 0u);
  EXPECT_EQ(stats.scored, 0u);
  EXPECT_TRUE(stats.completed);
}

TEST(SimplePpdb, RowFormat) {
  std::string out;
  run_stream("[VB] ||| commence ||| start ||| PPDB2.0Score=3.71\n[NN] ||| car ||| automobile ||| 4\n", out, {});
  const auto y1 = length_scorer({"[VB]", "commence", "start", 3.71});
  const auto y2 = length_scorer({"[NN]", "car", "automobile", 4.0});
  EXPECT_EQ(out, "[VB]\tcommence\tstart\t" + text::format_double(y1) + "\tsimplifying\t3.71\n" +
                     "[NN]\tcar\tautomobile\t" + text::format_double(y2) + "\tcomplicating\t4\n");
  const auto rules = [&] {
    std::istringstream in(out);
    return read_simpleppdb(in, "out");
  }();
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].yhat, y1);
  EXPECT_EQ(rules[1].cls, RuleClass::kComplicating);
  EXPECT_EQ(rules[1].quality, 4.0);
}

TEST(SimplePpdb, ThousandRulesAreConserved) {
  TempDir dir;
  testing::write_ppdb_rules(dir / "rules.txt", 1000, 7);
  std::string out;
  SimplePpdbOptions opt;
  opt.chunk_size = 64;
  const auto stats = run_stream(read_file(dir / "rules.txt"), out, opt);
  EXPECT_EQ(stats.lines, 1000u);
  EXPECT_EQ(stats.scored, 1000u);
  EXPECT_EQ(stats.classes[0] + stats.classes[1] + stats.classes[2], 1000u);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 1000);
}

TEST(SimplePpdb, MalformedLinesAreCountedAndSkipped) {
  TempDir dir;
  testing::write_ppdb_rules(dir / "rules.txt", 1000, 8, 7);
  std::string out;
  const auto stats = run_stream(read_file(dir / "rules.txt"), out, {});
  EXPECT_EQ(stats.malformed, 1000u / 7);
  EXPECT_EQ(stats.scored, 1000u - 1000u / 7);
  EXPECT_EQ(static_cast<std::uint64_t>(std::count(out.begin(), out.end(), '\n')), stats.scored);
}

TEST(SimplePpdb, JobsDoNotChangeOutput) {
  TempDir dir;
  testing::write_ppdb_rules(dir / "rules.txt", 3000, 9, 50);
  const auto input = read_file(dir / "rules.txt");
  std::string one, four, odd;
  SimplePpdbOptions opt;
  opt.chunk_size = 257;
  const auto s1 = run_stream(input, one, opt);
  opt.jobs = 4;
  const auto s4 = run_stream(input, four, opt);
  opt.jobs = 3;
  opt.chunk_size = 1000;
  run_stream(input, odd, opt);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, odd);
  EXPECT_EQ(s1.classes, s4.classes);
}

TEST(SimplePpdb, ScorerErrorsPropagateFromWorkers) {
  SimplePpdbOptions opt;
  opt.jobs = 4;
  std::istringstream in("[NN] ||| a ||| b ||| 4\n[NN] ||| c ||| d ||| 4\n[NN] ||| e ||| f ||| 4\n");
  std::ostringstream out;
  auto nan_scorer = [](const ParaphraseRule&) { return std::nan(""); };
  EXPECT_THROW(build_simpleppdb(nan_scorer, in, out, opt), Error);
}

TEST(SimplePpdb, StopThenResumeMatchesUninterruptedRun) {
  TempDir dir;
  testing::write_ppdb_rules(dir / "rules.txt", 1000, 10, 97);
  SimplePpdbOptions opt;
  opt.chunk_size = 64;
  const auto full = build_simpleppdb(length_scorer, dir / "rules.txt", dir / "full.tsv", opt);
  EXPECT_TRUE(full.completed);

  opt.checkpoint = dir / "part.ckpt";
  opt.stop_after = 500;
  const auto first = build_simpleppdb(length_scorer, dir / "rules.txt", dir / "part.tsv", opt);
  EXPECT_FALSE(first.completed);
  EXPECT_EQ(first.lines, 500u);
  // Simulate a crash after the checkpoint: junk appended to the output must be discarded.
  {
    std::ofstream junk(dir / "part.tsv", std::ios::app | std::ios::binary);
    junk << "partial row that was never checkpoint";
  }
  opt.stop_after.reset();
  opt.resume = true;
  const auto second = build_simpleppdb(length_scorer, dir / "rules.txt", dir / "part.tsv", opt);
  EXPECT_TRUE(second.completed);
  EXPECT_EQ(second.lines, full.lines);
  EXPECT_EQ(second.scored, full.scored);
  EXPECT_EQ(second.malformed, full.malformed);
  EXPECT_EQ(read_file(dir / "part.tsv"), read_file(dir / "full.tsv"));
}

TEST(SimplePpdb, ResumeWithoutCheckpointStartsFresh) {
  TempDir dir;
  testing::write_ppdb_rules(dir / "rules.txt", 100, 11);
  SimplePpdbOptions opt;
  opt.checkpoint = dir / "none.ckpt";
  opt.resume = true;
  const auto stats = build_simpleppdb(length_scorer, dir / "rules.txt", dir / "out.tsv", opt);
  EXPECT_EQ(stats.scored, 100u);
}

TEST(SimplePpdb, MissingInputIsMissingResource) {
  TempDir dir;
  try {
    build_simpleppdb(length_scorer, dir / "absent.txt", dir / "out.tsv", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingResource);
  }
}

ScoredRule rule(const char* cat, const char* src, const char* tgt, double yhat, std::optional<double> q) {
  return {cat, src, tgt, yhat, classify_score(yhat), q};
}

TEST(Generation, QualityThresholdIsInclusive) {
  const SubstitutionIndex index({rule("[VB]", "commence", "start", 0.9, 3.4),
                                 rule("[VB]", "commence", "begin", 0.8, 3.5),
                                 rule("[VB]", "commence", "initiate", 0.1, 4.2)});
  const auto subs = generate_substitutions("commence", "[VB]", index);
  ASSERT_EQ(subs.size(), 2u);
  EXPECT_EQ(subs[0].text, "begin");
  EXPECT_EQ(subs[1].text, "initiate");
}

TEST(Generation, PhraseTargetsNeedHigherQuality) {
  const SubstitutionIndex index({rule("[NN]", "the abode", "the home", 0.9, 3.9),
                                 rule("[NN]", "the abode", "the house", 0.5, 4.0)});
  const auto subs = generate_substitutions("the abode", "", index);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(subs[0].text, "the house");
}

TEST(Generation, CategoryMustMatch) {
  const SubstitutionIndex index({rule("[NN]", "show", "display", 0.5, 4.5), rule("[VB]", "show", "demonstrate", -0.5, 4.5)});
  const auto subs = generate_substitutions("show", "VB", index);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(subs[0].text, "demonstrate");
  EXPECT_EQ(generate_substitutions("show", "", index).size(), 2u);
}

TEST(Generation, UnknownTargetGivesEmptyList) {
  const SubstitutionIndex index({rule("[NN]", "car", "auto", 0.5, 4.5)});
  EXPECT_TRUE(generate_substitutions("zebra", "", index).empty());
}

TEST(Generation, DuplicatesKeepBestScoreAndSourceIsCaseInsensitive) {
  const SubstitutionIndex index({rule("[NN]", "Car", "auto", 0.2, 4.5), rule("[NN]", "car", "auto", 0.7, 4.0),
                                 rule("[NN]", "car", "car", 0.9, 5.0)});
  const auto subs = generate_substitutions("car", "", index);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(subs[0].yhat, 0.7);
}

TEST(GenerationProperty, InvariantToRuleOrder) {
  Rng rng(102);
  const std::vector<const char*> targets{"a", "b", "c", "d", "e", "f"};
  const std::vector<const char*> cats{"[NN]", "[VB]"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScoredRule> rules;
    const std::size_t n = 1 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = static_cast<double>(rng.below(5)) / 4.0 - 0.5;
      const double q = 3.0 + static_cast<double>(rng.below(5)) * 0.5;
      rules.push_back(rule(cats[rng.below(2)], "src", targets[rng.below(targets.size())], y, q));
    }
    const auto before = generate_substitutions("src", "", SubstitutionIndex(rules));
    rng.shuffle(std::span<ScoredRule>(rules));
    const auto after = generate_substitutions("src", "", SubstitutionIndex(rules));
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      ASSERT_EQ(before[i].text, after[i].text);
      ASSERT_EQ(before[i].yhat, after[i].yhat);
      ASSERT_EQ(before[i].quality, after[i].quality);
      ASSERT_EQ(before[i].category, after[i].category);
    }
  }
}

TEST(PpdbTraining, FixtureRulesProduceLabeledPairs) {
  TempDir dir;
  testing::write_resource_fixture(dir.path());
  const testing::FixtureResources res(dir.path());
  auto schema = FeatureSchema::standard(testing::kFixtureEmbeddingDim);
  schema.set_group_enabled(FeatureGroup::kContext, false);
  const FeatureExtractor extractor(schema, res.view());
  const auto rules = load_labeled_rules(dir / "rules_labeled.tsv");
  const auto pairs = ppdb_training_set(extractor, rules);
  ASSERT_EQ(pairs.size(), rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    EXPECT_EQ(pairs[i].label, static_cast<double>(static_cast<int>(rules[i].label)));
  }
  TrainConfig cfg = TrainConfig::ppdb();
  cfg.epochs = 30;
  const auto model = train_nrr(schema, pairs, cfg).model;
  const auto scorer = nrr_rule_scorer(model, extractor);
  const double y = scorer({"[VB]", "utilize", "use", 4.0});
  EXPECT_GE(y, -1.0);
  EXPECT_LE(y, 1.0);
  EXPECT_GT(y, scorer({"[VB]", "use", "utilize", 4.0}));
}

}  // namespace
}  // namespace lexsimp
