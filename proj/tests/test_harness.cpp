#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eggroll/harness/checkpoint.hpp"
#include "eggroll/harness/config.hpp"
#include "eggroll/harness/corpus.hpp"
#include "eggroll/harness/csv.hpp"
#include "eggroll/harness/experiments.hpp"

using namespace eggroll;
using namespace eggroll::harness;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = Config::parse_string(
      "# a comment\n"
      "alpha = 0.5\n"
      "steps=100  # trailing comment\n"
      "name = hello\n"
      "flag = true\n");
  CHECK(cfg.get_double("alpha", 0.0) == 0.5);
  CHECK(cfg.get_int("steps", 0) == 100);
  CHECK(cfg.get_str("name", "") == "hello");
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_int("missing", 42) == 42);
  cfg.reject_unknown();

  const auto bad = Config::parse_string("known = 1\nmystery_key = 2\n");
  (void)bad.get_int("known", 0);
  CHECK_THROWS_WITH_AS(bad.reject_unknown(),
                       doctest::Contains("mystery_key"), std::runtime_error);

  CHECK_THROWS_AS(Config::parse_string("not a pair\n"), std::runtime_error);
  const auto types = Config::parse_string("x = abc\n");
  CHECK_THROWS_AS(types.get_int("x", 0), std::runtime_error);
}

TEST_CASE("csv writer output is stable and schema-checked") {
  const std::string path = "/tmp/eggroll_test_csv.csv";
  {
    CsvWriter csv(path, {"a", "b"});
    csv.row({fmt_int(1), fmt_double(0.5)});
    csv.row({fmt_int(-3), fmt_double(1.0 / 3.0)});
    csv.comment("footer=1");
    CHECK_THROWS_AS(csv.row({"only-one"}), std::logic_error);
  }
  CHECK(slurp(path) ==
        "# schema_version=1\n"
        "a,b\n"
        "1,0.5\n"
        "-3,0.33333333333333331\n"
        "# footer=1\n");
  std::remove(path.c_str());
}

TEST_CASE("es checkpoint round-trip") {
  EsCheckpoint ck;
  ck.mu = {MatrixF::Random(3, 4), MatrixF::Random(2, 2)};
  ck.t = 123;
  ck.sigma_t = 0.05f;
  ck.alpha_t = 0.01f;
  ck.master_seed = 99;
  const std::string path = "/tmp/eggroll_test_es.ckpt";
  save_es_checkpoint(path, ck);
  const auto loaded = load_es_checkpoint(path);
  CHECK(loaded.t == 123);
  CHECK(loaded.sigma_t == 0.05f);
  CHECK(loaded.alpha_t == 0.01f);
  CHECK(loaded.master_seed == 99);
  REQUIRE(loaded.mu.size() == 2);
  CHECK((loaded.mu[0].array() == ck.mu[0].array()).all());
  CHECK((loaded.mu[1].array() == ck.mu[1].array()).all());
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_es_checkpoint("/tmp/does_not_exist.ckpt"), std::runtime_error);
}

TEST_CASE("synthetic corpus is deterministic with document separators") {
  const auto a = synthetic_corpus(5, 65536);
  const auto b = synthetic_corpus(5, 65536);
  CHECK(a == b);
  CHECK(a.size() == 65536);
  int separators = 0;
  for (auto byte : a)
    if (byte == 0) ++separators;
  CHECK(separators > 5);
  const auto c = synthetic_corpus(6, 65536);
  CHECK(a != c);
}

TEST_CASE("score-plot CSV rows are symmetric in z") {
  const std::string path = "/tmp/eggroll_test_scoreplot.csv";
  auto cfg = Config::parse_string("ranks = 5\nz_max = 1.0\nz_step = 0.25\n");
  const auto result = run_score_plot(cfg, path);
  REQUIRE(result.ranks.size() == 1);
  // parse back density by z
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // schema comment
  std::getline(in, line);  // header
  std::map<double, double> density;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 5);
    density[std::stod(cells[1])] = std::stod(cells[2]);
  }
  for (const auto& [z, d] : density) {
    REQUIRE(density.count(-z) == 1);
    CHECK(density.at(-z) == d);
  }
  std::remove(path.c_str());
}

TEST_CASE("es-bench checkpoint resume reproduces the uninterrupted run") {
  // run 20 steps in one go vs 10 + resume 10 via the engine API
  auto cfg = Config::parse_string("steps = 20\npop_size = 64\nseed = 23\n");
  const std::string csv_a = "/tmp/eggroll_resume_a.csv";
  const std::string ckpt = "/tmp/eggroll_resume.ckpt";
  run_es_bench(cfg, csv_a, ckpt, false);
  const auto full = load_es_checkpoint(ckpt);

  auto cfg_half = Config::parse_string("steps = 10\npop_size = 64\nseed = 23\n");
  run_es_bench(cfg_half, "/tmp/eggroll_resume_b.csv", ckpt, false);
  auto half = load_es_checkpoint(ckpt);

  // resume: same EsConfig, start_t = 10
  EsConfig es;
  es.pop_size = 64;
  es.master_seed = 23;
  es.t_max = 20;
  es.sigma = 0.1;
  es.alpha = 0.05;
  es.shaping = ShapingMode::CenteredRank;
  es.antithetic = true;
  std::vector<MatrixD> targets = {MatrixD::Constant(2, 2, 1.0)};
  const auto fitness = make_fitness("sphere", targets);
  run(half.mu, es, EsAlgo::Eggroll, fitness, nullptr, half.t);
  REQUIRE(full.mu.size() == half.mu.size());
  CHECK((full.mu[0].array() == half.mu[0].array()).all());

  std::remove(csv_a.c_str());
  std::remove("/tmp/eggroll_resume_b.csv");
  std::remove(ckpt.c_str());
}
