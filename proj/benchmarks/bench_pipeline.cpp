#include <benchmark/benchmark.h>

#include <sstream>
#include <string>

#include "lexsimp/features.hpp"
#include "lexsimp/model.hpp"
#include "lexsimp/ppdb.hpp"
#include "support.hpp"

namespace {

using namespace lexsimp;
namespace support = lexsimp::testing;

struct Fixture {
  support::TempDir dir;
  std::unique_ptr<support::FixtureResources> res;
  std::unique_ptr<FeatureExtractor> extractor;
  std::unique_ptr<NRRModel> model;
  std::string rules;

  Fixture() {
    support::write_resource_fixture(dir.path());
    res = std::make_unique<support::FixtureResources>(dir.path());
    extractor = std::make_unique<FeatureExtractor>(FeatureSchema::standard(support::kFixtureEmbeddingDim), res->view());
    const auto pairs = ppdb_training_set(*extractor, load_labeled_rules(dir.path() / "rules_labeled.tsv"));
    auto cfg = TrainConfig::ppdb();
    cfg.epochs = 5;
    model = std::make_unique<NRRModel>(train_nrr(extractor->schema(), pairs, cfg).model);
    support::write_ppdb_rules(dir.path() / "rules.txt", 20000, 4);
    rules = support::read_file(dir.path() / "rules.txt");
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_ExtractPair(benchmark::State& state) {
  const auto& ex = *fixture().extractor;
  for (auto _ : state) benchmark::DoNotOptimize(ex.extract_pair("utilize", "use"));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractPair);

void BM_BuildSimplePpdb(benchmark::State& state) {
  auto& f = fixture();
  const auto scorer = nrr_rule_scorer(*f.model, *f.extractor);
  SimplePpdbOptions opt;
  opt.jobs = static_cast<std::size_t>(state.range(0));
  std::uint64_t lines = 0;
  for (auto _ : state) {
    std::istringstream in(f.rules);
    std::ostringstream out;
    lines += build_simpleppdb(scorer, in, out, opt).lines;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(lines));
}
BENCHMARK(BM_BuildSimplePpdb)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
