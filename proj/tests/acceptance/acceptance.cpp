#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lexsimp/binning.hpp"
#include "lexsimp/lexicon.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/metrics.hpp"
#include "lexsimp/model.hpp"
#include "lexsimp/network.hpp"
#include "lexsimp/ppdb.hpp"
#include "lexsimp/random.hpp"
#include "lexsimp/vectorizer.hpp"
#include "lexsimp/ranking.hpp"
#include "support.hpp"

namespace {

using namespace lexsimp;
namespace support = lexsimp::testing;
namespace fs = std::filesystem;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)}; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---- child processes -------------------------------------------------------

pid_t spawn(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::string exe = LEXSIMP_CLI_PATH;
  argv.push_back(exe.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid == 0) {
    const int devnull = open("/dev/null", O_WRONLY);
    dup2(devnull, STDOUT_FILENO);
    dup2(devnull, STDERR_FILENO);
    execv(exe.c_str(), argv.data());
    _exit(127);
  }
  return pid;
}

/// Exit status, or 128 + signal for a killed child.
int wait_for(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

int run_cli(const std::vector<std::string>& args) { return wait_for(spawn(args)); }

std::string read_bytes(const fs::path& p) { return support::read_file(p); }

// ---- criteria --------------------------------------------------------------

Outcome gradient_correctness() {
  const auto r = random_gradient_check(20240601, 100);
  return pass_if(r.draws == 100 && r.worst.max_relative_error < 1e-4,
                 "draws=100 max_relative_error=" + fmt(r.worst.max_relative_error) + " (limit 1e-4)");
}

Outcome binning_invariants() {
  Rng rng(2);
  std::size_t violations = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  std::vector<double> out, shifted;
  for (int trial = 0; trial < 10000; ++trial) {
    const double lo = rng.uniform(-100, 100);
    const double hi = lo + std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    const int k = 1 + static_cast<int>(rng.below(20));
    const double gamma = rng.uniform(0.05, 1.0);
    const double span = hi - lo;
    const double v = rng.uniform(lo - 0.5 * span, hi + 0.5 * span);
    const auto bins = FeatureBins::make(lo, hi, k, gamma);
    out.assign(static_cast<std::size_t>(k), 0.0);
    bins.transform(v, out);
    double sum = 0;
    for (double x : out) {
      if (x < 0) fail("negative output");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("sum " + fmt(sum));
    double nearest = std::numeric_limits<double>::infinity();
    for (double mu : bins.centers) nearest = std::min(nearest, std::abs(v - mu));
    const double top = *std::max_element(out.begin(), out.end());
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (std::abs(v - bins.centers[j]) == nearest && out[j] != top) fail("argmax is not the nearest center");
    }
    const double eps = bins.sigma * rng.uniform(1e-6, 1e-1);
    shifted.assign(out.size(), 0.0);
    bins.transform(v + eps, shifted);
    const double bound = eps * span / (2 * bins.sigma * bins.sigma) + 1e-12;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (std::abs(out[j] - shifted[j]) > bound) fail("continuity bound");
    }
  }
  return pass_if(violations == 0, "draws=10000 violations=" + std::to_string(violations) +
                                      (first.empty() ? "" : " first=" + first));
}

Outcome aggregation_oracle() {
  Rng rng(3);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<std::string> cands;
    for (std::size_t i = 0; i < n; ++i) cands.push_back("c" + std::to_string(rng.below(100)) + "_" + std::to_string(i));
    std::vector<std::vector<double>> s(n, std::vector<double>(n));
    const bool coarse = rng.below(2) == 0;
    for (auto& row : s) {
      for (auto& v : row) v = coarse ? static_cast<double>(rng.below(3)) - 1.0 : rng.uniform(-1, 1);
    }
    // Brute force: materialize every row sum, then sort by (sum, text).
    std::vector<double> total(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) total[i] += s[i][j];
      }
    }
    std::vector<std::size_t> want(n);
    std::iota(want.begin(), want.end(), 0);
    std::sort(want.begin(), want.end(), [&](std::size_t a, std::size_t b) {
      return total[a] != total[b] ? total[a] < total[b] : cands[a] < cands[b];
    });
    const auto got = rank_by_pairwise(cands, [&](std::size_t i, std::size_t j) { return s[i][j]; });
    for (std::size_t k = 0; k < n; ++k) {
      if (got[k].index != want[k]) {
        ++mismatches;
        break;
      }
    }
  }
  return pass_if(mismatches == 0, "trials=1000 mismatches=" + std::to_string(mismatches));
}

Outcome synthetic_ranking() {
  const auto words = support::make_synthetic_words(500, 4);
  std::vector<std::size_t> train_words(400), test_words(100);
  std::iota(train_words.begin(), train_words.end(), 0);
  std::iota(test_words.begin(), test_words.end(), 400);
  const auto train = support::synthetic_pairs(words, train_words, 8000, 5);

  TrainConfig cfg = TrainConfig::ranking();  // k=10, gamma=0.2, lr=0.0005, 100 epochs
  cfg.seed = 6;
  const auto model = train_nrr(words.schema, train, cfg).model;

  std::size_t agree = 0, total = 0;
  std::vector<double> r_pred, r_latent;
  for (auto a : test_words) {
    double r = 0;
    for (auto b : test_words) {
      if (a == b) continue;
      const double y = model.predict(support::synthetic_pair(words, a, b));
      r += y;
      const double truth = words.latent[a] - words.latent[b];
      if (truth == 0) continue;
      ++total;
      agree += (y > 0) == (truth > 0);
    }
    r_pred.push_back(r);
    r_latent.push_back(words.latent[a]);
  }
  const double acc = static_cast<double>(agree) / static_cast<double>(total);
  const double r = metrics::pearson(r_pred, r_latent);
  return pass_if(acc >= 0.90 && r >= 0.9,
                 "held-out sign_accuracy=" + fmt(acc) + " (>=0.90) pearson=" + fmt(r) + " (>=0.9)");
}

Outcome full_reproduction() {
  return {Verdict::kSkip,
          "optional; needs SemEval-2012 data, Google-1T, SubIMDB and GoogleNews vectors (see README)"};
}

Outcome threshold_mapping() {
  const std::vector<std::pair<double, RuleClass>> table{
      {-1.0, RuleClass::kComplicating},  {-0.401, RuleClass::kComplicating}, {-0.4, RuleClass::kNoDifference},
      {0.0, RuleClass::kNoDifference},   {0.4, RuleClass::kNoDifference},    {0.401, RuleClass::kSimplifying},
      {1.0, RuleClass::kSimplifying},
  };
  std::string got;
  bool ok = true;
  for (const auto& [y, want] : table) {
    const auto c = classify_score(y);
    ok = ok && c == want;
    got += (got.empty() ? "" : ",") + std::string(to_string(c));
  }
  return pass_if(ok, got);
}

Outcome lexicon_table() {
  struct Row {
    const char* word;
    double avg;
    std::vector<int> r;
  };
  const std::vector<Row> rows{
      {"watch", 1.0, {1, 1, 1, 1, 1}},       {"muscles", 1.6, {2, 1, 2, 2, 1}},     {"sweatshirts", 1.8, {2, 1, 2, 3, 1}},
      {"giant", 2.0, {2, 3, 1, 1, 3}},       {"pattern", 2.4, {2, 3, 2, 3, 2}},     {"Christianity", 2.8, {3, 2, 2, 3, 4}},
      {"educational", 3.2, {3, 3, 3, 3, 4}}, {"revenue", 3.6, {4, 4, 3, 3, 4}},     {"cortex", 4.2, {4, 4, 4, 4, 5}},
      {"crescent", 4.6, {5, 5, 5, 5, 3}},    {"Memorabilia", 5.4, {5, 6, 6, 5, 5}}, {"assay", 5.8, {6, 6, 6, 5, 6}},
  };
  std::vector<RatingRecord> recs;
  for (const auto& row : rows) {
    RatingRecord rec{row.word, {}};
    for (int v : row.r) rec.ratings.emplace_back(v);
    recs.push_back(rec);
  }
  const auto lex = aggregate_ratings(recs).lexicon;
  std::string wrong;
  for (const auto& row : rows) {
    const auto got = lex.find(row.word);
    if (!got || *got != row.avg) wrong += std::string(wrong.empty() ? "" : ",") + row.word;
  }
  return pass_if(wrong.empty(), wrong.empty() ? "12/12 Avg values exact" : "mismatched: " + wrong);
}

Outcome ppdb_pipeline(const fs::path& resources, const fs::path& work) {
  const auto start = std::chrono::steady_clock::now();
  const auto model = (work / "ppdb.bin").string();
  const std::string rdir = resources.string();
  if (run_cli({"-q", "--resource-dir", rdir, "train", "--task", "ppdb", "--data", (resources / "rules_labeled.tsv").string(),
               "--out", model, "--epochs", "20"}) != 0) {
    return {Verdict::kFail, "could not train the PPDB model"};
  }
  const auto rules = work / "rules100k.txt";
  support::write_ppdb_rules(rules, 100000, 8, 997);
  auto build = [&](const std::string& out, const std::string& jobs, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"-q", "--resource-dir", rdir, "build-simpleppdb", "--model", model, "--rules",
                                  rules.string(), "--out", (work / out).string(), "--jobs", jobs};
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  if (run_cli(build("j1.tsv", "1")) != 0 || run_cli(build("j4.tsv", "4")) != 0) {
    return {Verdict::kFail, "build-simpleppdb exited with an error"};
  }
  const auto j1 = read_bytes(work / "j1.tsv");
  const bool jobs_equal = !j1.empty() && j1 == read_bytes(work / "j4.tsv");

  // Kill a run once its checkpoint shows progress, then resume it.
  const auto ckpt = work / "killed.tsv.ckpt";
  const pid_t pid = spawn(build("killed.tsv", "1", {"--chunk-size", "500"}));
  std::uint64_t seen = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
  while (std::chrono::steady_clock::now() < deadline) {
    std::ifstream in(ckpt);
    std::string key;
    std::uint64_t value = 0;
    while (in >> key >> value) {
      if (key == "lines") seen = value;
    }
    if (seen >= 20000) break;
    int status = 0;
    if (waitpid(pid, &status, WNOHANG) == pid) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  kill(pid, SIGKILL);
  const int killed = wait_for(pid);
  const bool was_killed = killed == 128 + SIGKILL && seen > 0 && seen < 100000;
  const int resumed = run_cli(build("killed.tsv", "4", {"--chunk-size", "500", "--resume"}));
  const bool resume_equal = resumed == 0 && read_bytes(work / "killed.tsv") == j1;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return pass_if(jobs_equal && was_killed && resume_equal && secs < 60,
                 std::string("jobs4==jobs1:") + (jobs_equal ? "yes" : "no") + " killed_at_line=" + std::to_string(seen) +
                     (was_killed ? "" : "(kill missed)") + " resumed==uninterrupted:" + (resume_equal ? "yes" : "no") +
                     " runtime=" + fmt(secs) + "s (<60)");
}

Outcome metric_oracles() {
  std::vector<std::string> bad;
  auto check = [&](const char* name, double got, double want) {
    if (std::abs(got - want) > 1e-12) bad.push_back(name);
  };
  const std::vector<metrics::GoldRanking> gold{
      {{"a", "b", "c"}, {1, 2, 3}}, {{"a", "b", "c"}, {2, 1, 1}}, {{"a", "b"}, {2, 1}}, {{"x", "y"}, {1, 2}}};
  check("p_at_1", metrics::precision_at_1({{"a", "b", "c"}, {"c", "a", "b"}, {"a", "b"}, {"y", "x"}}, gold), 0.5);
  const std::vector<double> x{1, 2, 3, 4}, y{1, 2, 2, 5};
  check("pearson", metrics::pearson(x, y), 6.0 / std::sqrt(45.0));
  check("map", metrics::mean_average_precision({{true, false, true, true, false}, {false, true}, {false}}).value,
        ((1.0 + 2.0 / 3 + 0.75) / 3 + 0.5 + 0.0) / 3);
  check("g_score", metrics::g_score(0.8, 0.6), 0.96 / 1.4);
  const auto cls = metrics::class_precisions({1, 1, -1, -1, -1, 1, 0, 0, 1, -1}, {1, 1, 1, -1, -1, -1, 0, 0, 0, 0},
                                             {-1, 0, 1}, 1);
  check("precision_simplifying", cls.per_class.at(1).precision, 0.5);
  check("precision_complicating", cls.per_class.at(-1).precision, 0.5);
  check("precision_no_difference", cls.per_class.at(0).precision, 1.0);
  check("accuracy", cls.accuracy, 0.6);

  Rng rng(9);
  std::size_t order_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(), r = rng.uniform();
    const double h = metrics::g_score(a, r), g = std::sqrt(a * r), m = (a + r) / 2;
    if (h > g * (1 + 1e-12) || g > m * (1 + 1e-12)) ++order_violations;
  }
  std::string detail = "fixtures " + std::to_string(8 - bad.size()) + "/8 exact";
  for (const auto& b : bad) detail += " bad=" + b;
  detail += "; harmonic<=geometric<=arithmetic violations=" + std::to_string(order_violations) + "/10000";
  return pass_if(bad.empty() && order_violations == 0, detail);
}

Outcome determinism(const fs::path& resources, const fs::path& work) {
  const std::string rdir = resources.string();
  for (const char* name : {"det_a.bin", "det_b.bin"}) {
    if (run_cli({"-q", "--resource-dir", rdir, "--seed", "11", "train", "--task", "rank", "--data",
                 (resources / "ranking.tsv").string(), "--out", (work / name).string()}) != 0) {
      return {Verdict::kFail, "train exited with an error"};
    }
  }
  const auto a = read_bytes(work / "det_a.bin");
  const auto b = read_bytes(work / "det_b.bin");
  return pass_if(!a.empty() && a == b, "two seeded 100-epoch train runs: " + std::to_string(a.size()) + " bytes, " +
                                           (a == b ? "identical" : "different"));
}

}  // namespace

int main() {
  lexsimp::log().set_level(spdlog::level::warn);
  support::TempDir resources;
  support::TempDir work;
  support::write_resource_fixture(resources.path());

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_correctness},
      {2, binning_invariants},
      {3, aggregation_oracle},
      {4, synthetic_ranking},
      {5, full_reproduction},
      {6, threshold_mapping},
      {7, lexicon_table},
      {8, [&] { return ppdb_pipeline(resources.path(), work.path()); }},
      {9, metric_oracles},
      {10, [&] { return determinism(resources.path(), work.path()); }},
  };
  const char* names[] = {"",
                         "gradient correctness",
                         "binning invariants",
                         "aggregation oracle",
                         "synthetic end-to-end ranking",
                         "full reproduction (optional)",
                         "three-way threshold mapping",
                         "lexicon aggregation vs table",
                         "ppdb batch pipeline",
                         "metric oracles",
                         "determinism"};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kFail ? "FAIL" : "SKIP";
    if (o.verdict == Verdict::kFail) ++failed;
    std::printf("criterion %2d %s: %s: %s [%.2fs]\n", id, tag, names[id], o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%s: %d gated criteria failed\n", failed == 0 ? "ACCEPTED" : "REJECTED", failed);
  return failed == 0 ? 0 : 1;
}
