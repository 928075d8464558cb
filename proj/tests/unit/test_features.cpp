#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lexsimp/error.hpp"
#include "lexsimp/features.hpp"
#include "lexsimp/syllables.hpp"
#include "lexsimp/text.hpp"
#include "support.hpp"

namespace lexsimp {
namespace {

class FeatureFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    testing::write_resource_fixture(dir_->path());
    res_ = new testing::FixtureResources(dir_->path());
  }
  static void TearDownTestSuite() {
    delete res_;
    delete dir_;
  }
  static FeatureSchema standard() { return FeatureSchema::standard(testing::kFixtureEmbeddingDim); }
  static double at(const FeatureExtractor& ex, const std::vector<double>& v, std::string_view name) {
    return v.at(*ex.schema().side_index(name));
  }
  static inline testing::TempDir* dir_ = nullptr;
  static inline testing::FixtureResources* res_ = nullptr;
};

TEST(FeatureSchema, StandardInventory) {
  const auto s = FeatureSchema::standard(300);
  const auto sides = s.side_scalars();
  ASSERT_FALSE(sides.empty());
  EXPECT_EQ(sides[0]->name, "word_count");
  EXPECT_EQ(s.pair_scalars().size(), 1u);
  ASSERT_NE(s.pair_vector(), nullptr);
  EXPECT_EQ(s.pair_vector()->width, 300u);
  EXPECT_FALSE(s.specs()[*s.side_index("lex_present")].binnable);
  // Every n-gram of the +-2 window that covers the target: n=2: 2, n=3: 3, n=4: 2, n=5: 1.
  EXPECT_EQ(context_slots().size(), 8u);
}

TEST(FeatureSchema, HashTracksEnabledSet) {
  auto a = FeatureSchema::standard(300);
  auto b = FeatureSchema::standard(300);
  EXPECT_EQ(a.hash(), b.hash());
  b.set_group_enabled(FeatureGroup::kContext, false);
  EXPECT_NE(a.hash(), b.hash());
  b.set_group_enabled(FeatureGroup::kContext, true);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(FeatureSchema::standard(300).hash(), FeatureSchema::standard(50).hash());
  EXPECT_THROW(a.set_enabled("nope", false), Error);
}

TEST(FeatureSchema, RejectsInvalidSpecs) {
  FeatureSpec x{"x"};
  EXPECT_THROW(FeatureSchema({x, x}), Error);
  FeatureSpec v{"v"};
  v.kind = FeatureKind::kVector;
  v.pairwise = true;
  EXPECT_THROW(FeatureSchema({v}), Error);  // binnable vector
  v.binnable = false;
  v.pairwise = false;
  EXPECT_THROW(FeatureSchema({v}), Error);  // per-side vector
}

TEST(FeatureGroups, NamesRoundTrip) {
  for (auto g : {FeatureGroup::kSurface, FeatureGroup::kFrequency, FeatureGroup::kLexicon, FeatureGroup::kContext,
                 FeatureGroup::kEmbeddings}) {
    EXPECT_EQ(parse_feature_group(to_string(g)), g);
  }
  EXPECT_FALSE(parse_feature_group("bogus").has_value());
}

TEST_F(FeatureFixture, SurfaceFeatures) {
  const FeatureExtractor ex(standard(), res_->view());
  const auto v = ex.extract_single("ambulate");
  EXPECT_EQ(at(ex, v, "word_count"), 1.0);
  EXPECT_EQ(at(ex, v, "char_len"), 8.0);
  EXPECT_EQ(at(ex, v, "syllables"), static_cast<double>(count_syllables("ambulate")));
  const auto p = ex.extract_single("big dog");
  EXPECT_EQ(at(ex, p, "word_count"), 2.0);
  EXPECT_EQ(at(ex, p, "char_len"), 7.0);
}

TEST_F(FeatureFixture, FrequencyFeaturesMatchTables) {
  const FeatureExtractor ex(standard(), res_->view());
  const auto v = ex.extract_single("car");
  EXPECT_DOUBLE_EQ(at(ex, v, "ngram_logfreq"), log_frequency(res_->ngram, "car"));
  EXPECT_DOUBLE_EQ(at(ex, v, "simplewiki_relfreq"), relative_frequency(res_->simple, res_->normal, "car"));
}

TEST_F(FeatureFixture, LexiconIndicatorAndScore) {
  const FeatureExtractor ex(standard(), res_->view());
  const auto known = ex.extract_single("use");
  EXPECT_EQ(at(ex, known, "lex_present"), 1.0);
  EXPECT_EQ(at(ex, known, "lex_score"), *res_->lexicon.find("use"));
  const auto unknown = ex.extract_single("qwertyuiop");
  EXPECT_EQ(at(ex, unknown, "lex_present"), 0.0);
  EXPECT_EQ(at(ex, unknown, "lex_score"), 0.0);
}

TEST_F(FeatureFixture, ContextFeaturesFallBackWithoutContext) {
  const FeatureExtractor ex(standard(), res_->view());
  const auto v = ex.extract_single("park");
  EXPECT_EQ(at(ex, v, "had_context"), 0.0);
  const std::vector<std::string> tokens{"park"};
  const double fallback = ex.context_free_logprob(tokens);
  EXPECT_DOUBLE_EQ(fallback, res_->lm.logprob(tokens));
  for (const auto& slot : context_slots()) EXPECT_EQ(at(ex, v, slot.name()), fallback);
}

TEST_F(FeatureFixture, ContextFeaturesUseTheWindow) {
  const FeatureExtractor ex(standard(), res_->view());
  Context ctx{{"the", "man"}, {"in", "the"}};
  const auto v = ex.extract_single("saw", &ctx);
  EXPECT_EQ(at(ex, v, "had_context"), 1.0);
  const std::vector<std::string> bigram{"man", "saw"};
  const std::vector<std::string> trigram{"the", "man", "saw"};
  const std::vector<std::string> after{"saw", "in"};
  EXPECT_DOUBLE_EQ(at(ex, v, "lm_n2_l1"), res_->lm.logprob(bigram));
  EXPECT_DOUBLE_EQ(at(ex, v, "lm_n3_l2"), res_->lm.logprob(trigram));
  EXPECT_DOUBLE_EQ(at(ex, v, "lm_n2_l0"), res_->lm.logprob(after));
}

TEST_F(FeatureFixture, MissingResourceNamesTheResource) {
  auto r = res_->view();
  r.lm = nullptr;
  try {
    FeatureExtractor ex(standard(), r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingResource);
    EXPECT_NE(std::string(e.what()).find("language model"), std::string::npos);
  }
  auto schema = standard();
  schema.set_group_enabled(FeatureGroup::kContext, false);
  EXPECT_NO_THROW(FeatureExtractor(schema, r));
}

TEST_F(FeatureFixture, EmbeddingDimensionMismatch) {
  try {
    FeatureExtractor ex(FeatureSchema::standard(300), res_->view());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST_F(FeatureFixture, PairFeaturesAreAntisymmetric) {
  const FeatureExtractor ex(standard(), res_->view());
  const auto ab = ex.extract_pair("automobile", "car");
  const auto ba = ex.extract_pair("car", "automobile");
  EXPECT_EQ(ab.schema_hash, ex.schema().hash());
  EXPECT_EQ(ab.a, ba.b);
  for (std::size_t i = 0; i < ab.diff.size(); ++i) {
    EXPECT_EQ(ab.diff[i], ab.a[i] - ab.b[i]);
    EXPECT_EQ(ab.diff[i], -ba.diff[i]);
  }
  ASSERT_EQ(ab.pair.size(), 1u);
  EXPECT_DOUBLE_EQ(ab.pair[0], ba.pair[0]);
  ASSERT_EQ(ab.vec.size(), testing::kFixtureEmbeddingDim);
  for (std::size_t d = 0; d < ab.vec.size(); ++d) EXPECT_EQ(ab.vec[d], -ba.vec[d]);
}

TEST_F(FeatureFixture, EmptyPhraseRejected) {
  const FeatureExtractor ex(standard(), res_->view());
  EXPECT_THROW(ex.extract_single("  ,. "), Error);
}

TEST(Text, TokenizeAndSplit) {
  EXPECT_EQ(text::tokenize("  Hello, world! -- ok "), (std::vector<std::string>{"Hello", "world", "ok"}));
  EXPECT_EQ(text::split(" a ||| b |||c", std::string_view("|||")).size(), 3u);
}

}  // namespace
}  // namespace lexsimp
