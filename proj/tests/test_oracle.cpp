#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "steadytrunc/oracle.hpp"
#include "steadytrunc/parse.hpp"

using namespace steadytrunc;

namespace {
const std::string kModels = STEADYTRUNC_MODELS_DIR;
std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double tv_distance(const OccupancyEstimate& occ, double lambda) {
  // TV = (1/2) sum |p_hat - p| over the union of supports
  double s = 0.0;
  long long max_k = 0;
  for (const auto& [x, f] : occ.fraction) max_k = std::max(max_k, x[0]);
  std::vector<double> ref(max_k + 400);
  double tail = 1.0;
  for (long long k = 0; k < static_cast<long long>(ref.size()); ++k) {
    ref[k] = poisson_pmf(lambda, k);
    tail -= ref[k];
  }
  std::vector<double> est(ref.size(), 0.0);
  for (const auto& [x, f] : occ.fraction)
    if (x[0] < static_cast<long long>(est.size())) est[x[0]] += f;
  for (std::size_t k = 0; k < ref.size(); ++k) s += std::abs(est[k] - ref[k]);
  return 0.5 * (s + std::max(0.0, tail));
}
}  // namespace

TEST_CASE("poisson pmf satisfies the ratio recursion and normalizes") {
  for (long long k : {0ll, 1ll, 50ll, 199ll, 200ll}) {
    double a = poisson_pmf(200.0, k);
    double b = poisson_pmf(200.0, k + 1);
    CHECK(b / a == Catch::Approx(200.0 / (k + 1)).epsilon(1e-10));
  }
  double sum = 0.0;
  for (long long k = 0; k <= 500; ++k) sum += poisson_pmf(200.0, k);
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(poisson_pmf(200.0, -1) == 0.0);
}

TEST_CASE("product-poisson detection on the shipped models") {
  auto m1 = product_poisson_rates(
      parse_model(read_file(kModels + "/birth_death.model")));
  REQUIRE(m1);
  CHECK((*m1)[0] == Catch::Approx(200.0));
  auto m2 = product_poisson_rates(
      parse_model(read_file(kModels + "/parallel_birth_death.model")));
  REQUIRE(m2);
  CHECK((*m2)[0] == Catch::Approx(100.0));
  CHECK((*m2)[1] == Catch::Approx(100.0));
  // coupled or non-mass-action networks are rejected
  CHECK_FALSE(product_poisson_rates(
      parse_model(read_file(kModels + "/p53.model"))));
  CHECK_FALSE(product_poisson_rates(
      parse_model(read_file(kModels + "/exclusive_switch.model"))));
}

TEST_CASE("analytic stationary distribution renormalizes over the box") {
  std::vector<double> rates = {200.0};
  StateIndex full = StateIndex::box({0}, {600});
  Distribution d = analytic_stationary(rates, full);
  CHECK(d.sum() == Catch::Approx(1.0).margin(1e-12));
  CHECK(d.p[200] == Catch::Approx(poisson_pmf(200.0, 200)).epsilon(1e-9));
  // a box excluding the mode still renormalizes to one
  StateIndex tail = StateIndex::box({260}, {400});
  Distribution t = analytic_stationary(rates, tail);
  CHECK(t.sum() == Catch::Approx(1.0).margin(1e-12));
  // product mode at (100, 100) (ties with 99 by Poisson mode structure)
  std::vector<double> r2 = {100.0, 100.0};
  StateVec mode = {100, 100}, off = {100, 103};
  CHECK(product_poisson_pmf(r2, mode) >= product_poisson_pmf(r2, off));
}

TEST_CASE("ssa occupancy converges to the analytic law") {
  ReactionNetwork net = parse_model(read_file(kModels + "/birth_death.model"));
  SsaConfig cfg;
  cfg.x0 = {0};
  cfg.seed = 1234;
  cfg.T = 1e4;
  double tv_small = tv_distance(ssa_occupancy(net, cfg), 200.0);
  cfg.T = 1e5;
  double tv_big = tv_distance(ssa_occupancy(net, cfg), 200.0);
  CHECK(tv_big < tv_small);
  CHECK(tv_big <= 0.02);
}

TEST_CASE("ssa occupancy stays normalized right above the burn-in") {
  ReactionNetwork net = parse_model(read_file(kModels + "/birth_death.model"));
  SsaConfig cfg;
  cfg.x0 = {0};
  cfg.T = 1.0;
  cfg.burn_in_frac = 0.9;
  cfg.seed = 5;
  OccupancyEstimate occ = ssa_occupancy(net, cfg);
  double s = 0.0;
  for (const auto& [x, f] : occ.fraction) s += f;
  CHECK(s == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("ssa explosion guard trips on a jump cap") {
  ReactionNetwork net = parse_model(read_file(kModels + "/birth_death.model"));
  SsaConfig cfg;
  cfg.x0 = {0};
  cfg.T = 1e5;
  cfg.max_jumps = 1000;
  CHECK_THROWS_AS(ssa_occupancy(net, cfg), NumericError);
}

TEST_CASE("p53 trajectory oscillates: autocorrelation peaks at nonzero lag") {
  ReactionNetwork net = parse_model(read_file(kModels + "/p53.model"));
  auto traj = ssa_trajectory(net, {0, 0, 0}, 600.0, 0.5, 77);
  REQUIRE(traj.size() > 800);
  // drop the transient, analyze the p53 coordinate
  std::vector<double> xs;
  for (std::size_t i = traj.size() / 5; i < traj.size(); ++i)
    xs.push_back(static_cast<double>(traj[i][0]));
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= xs.size();
  auto autocorr = [&](std::size_t lag) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + lag < xs.size(); ++i)
      num += (xs[i] - mean) * (xs[i + lag] - mean);
    for (double v : xs) den += (v - mean) * (v - mean);
    return num / den;
  };
  // a genuine positive local maximum away from lag 0
  double best = -1.0;
  std::size_t best_lag = 0;
  for (std::size_t lag = 8; lag <= 400 && lag < xs.size() / 2; ++lag) {
    double r = autocorr(lag);
    if (r > best) {
      best = r;
      best_lag = lag;
    }
  }
  INFO("peak autocorrelation " << best << " at lag " << best_lag);
  CHECK(best > 0.1);
  CHECK(best_lag >= 8);
}

TEST_CASE("brute-force lumped rate: worked values and the volume cap") {
  ReactionNetwork net = parse_model("species X; 2*X -> 0 @ mass_action(1);");
  CHECK(brute_force_lumped_rate(net, 0, MacroState({0}, {3})) ==
        Catch::Approx(4.0));
  ReactionNetwork cst = parse_model("species A, B; 0 -> A @ mass_action(100);");
  CHECK(brute_force_lumped_rate(cst, 0, MacroState({0, 0}, {3, 3})) ==
        Catch::Approx(1600.0));
  MacroState empty({2}, {1});
  CHECK(brute_force_lumped_rate(net, 0, empty) == 0.0);
  CHECK_THROWS_AS(
      brute_force_lumped_rate(net, 0, MacroState({0}, {2'000'000})),
      InputError);
}
