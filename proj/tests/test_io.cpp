#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "steadytrunc/io.hpp"
#include "steadytrunc/oracle.hpp"
#include "steadytrunc/run.hpp"

using namespace steadytrunc;
namespace fs = std::filesystem;

namespace {
const std::string kModels = STEADYTRUNC_MODELS_DIR;
const std::string kCli = STEADYTRUNC_CLI_PATH;

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("steadytrunc_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}
}  // namespace

TEST_CASE("distribution csv round-trips bit for bit") {
  auto dir = temp_dir("csv");
  std::vector<StateVec> states;
  std::vector<double> probs;
  CounterRng rng(3);
  double total = 0.0;
  for (int i = 0; i < 200; ++i) {
    states.push_back({static_cast<long long>(i), static_cast<long long>(i % 7)});
    double v = rng.uniform();
    probs.push_back(v);
    total += v;
  }
  for (double& v : probs) v /= total;
  std::string path = (dir / "d.csv").string();
  write_distribution_csv(path, {"A", "B"}, states, probs);
  DistributionFile f = read_distribution_csv(path);
  REQUIRE(f.states.size() == states.size());
  CHECK(f.species == std::vector<std::string>{"A", "B"});
  for (std::size_t i = 0; i < states.size(); ++i) {
    CHECK(f.states[i] == states[i]);
    CHECK(f.probs[i] == probs[i]);  // exact: 17 significant digits
  }
}

TEST_CASE("diff report on identical, shifted and disjoint supports") {
  DistributionFile a;
  a.species = {"S"};
  a.states = {{0}, {1}};
  a.probs = {0.25, 0.75};
  DiffReport same = diff_distributions(a, a);
  CHECK(same.total_abs == 0.0);
  CHECK(same.max_abs == 0.0);
  CHECK(same.mass_a_outside_b == 0.0);

  DistributionFile b;
  b.species = {"S"};
  b.states = {{5}, {6}};
  b.probs = {0.5, 0.5};
  DiffReport disjoint = diff_distributions(a, b);
  CHECK(disjoint.total_abs == Catch::Approx(2.0));
  CHECK(disjoint.mass_a_outside_b == Catch::Approx(1.0));
  CHECK(disjoint.mass_b_outside_a == Catch::Approx(1.0));

  DistributionFile c;
  c.species = {"X", "Y"};
  CHECK_THROWS_AS(diff_distributions(a, c), InputError);
}

TEST_CASE("shipped schema file matches the embedded schema") {
  std::ifstream in(std::string(STEADYTRUNC_MODELS_DIR) +
                   "/../schemas/summary.schema.json");
  REQUIRE(in.good());
  json shipped = json::parse(in);
  json embedded = json::parse(summary_schema_text());
  CHECK(shipped == embedded);
}

TEST_CASE("schema validation flags missing keys and wrong types") {
  json schema = json::parse(summary_schema_text());
  json bad = {{"schema_version", "one"}};
  CHECK_THROWS_AS(validate_against_schema(bad, schema), NumericError);
  json missing = {{"schema_version", 1}};
  CHECK_THROWS_AS(validate_against_schema(missing, schema), NumericError);
}

TEST_CASE("end-to-end run writes validated artifacts") {
  auto dir = temp_dir("run");
  RunConfig cfg;
  cfg.model_path = kModels + "/birth_death.model";
  cfg.out_dir = (dir / "out").string();
  cfg.epsilon = 1e-3;
  cfg.epsilon_l = 1e-4;
  cfg.m = 4;
  cfg.oracle = OracleMode::Analytic;
  // mu = 200 needs a few hundred states; the Lyapunov box covers it
  RunOutput out = run(cfg);
  CHECK(out.refine.reached_unit);
  CHECK(fs::exists(cfg.out_dir + "/distribution.csv"));
  CHECK(fs::exists(cfg.out_dir + "/iterations.csv"));
  CHECK(fs::exists(cfg.out_dir + "/summary.json"));
  CHECK(fs::exists(cfg.out_dir + "/marginal_S.csv"));
  CHECK(fs::exists(cfg.out_dir + "/oracle.csv"));
  CHECK(out.summary["outside_mass"].get<double>() < 1e-4);
  // summary validates against the shipped schema
  std::ifstream sin(cfg.out_dir + "/summary.json");
  json parsed = json::parse(sin);
  validate_against_schema(parsed, json::parse(summary_schema_text()));
  // distribution re-reads consistently and sums to one
  DistributionFile f =
      read_distribution_csv(cfg.out_dir + "/distribution.csv");
  double s = 0.0;
  for (double v : f.probs) s += v;
  CHECK(s == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("missing model file exits with code 2 and no partial outputs") {
  auto dir = temp_dir("cli2");
  std::string out = (dir / "out").string();
  int rc = run_cli("run --model /nonexistent.model --out " + out);
  CHECK(rc == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("cli diff on identical distributions reports zeros") {
  auto dir = temp_dir("clidiff");
  std::string path = (dir / "d.csv").string();
  write_distribution_csv(path, {"S"}, {{0}, {1}}, {0.5, 0.5});
  int rc = std::system(
      (kCli + " diff " + path + " " + path + " > " + (dir / "o.json").string())
          .c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  std::ifstream in(dir / "o.json");
  json j = json::parse(in);
  CHECK(j["total_abs_diff"].get<double>() == 0.0);
}

TEST_CASE("cli run smoke test with explicit init box") {
  auto dir = temp_dir("clirun");
  std::string out = (dir / "out").string();
  int rc = run_cli("run --model " + kModels +
                   "/birth_death.model --epsilon 1e-2 --init-exponent 3 "
                   "--init-box 511 --out " + out);
  CHECK(rc == 0);
  CHECK(fs::exists(out + "/summary.json"));
  // bad flag value is an input error
  int rc2 = run_cli("run --model " + kModels +
                    "/birth_death.model --solver nonsense --out " + out);
  CHECK(rc2 == 2);
}
