#include <catch2/catch_amalgamated.hpp>
#include <fstream>
#include <sstream>

#include "steadytrunc/lyapunov.hpp"
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
ReactionNetwork p53() { return parse_model(read_file(kModels + "/p53.model")); }
}  // namespace

TEST_CASE("p53 drift at the origin is 10800") {
  ReactionNetwork net = p53();
  REQUIRE(net.lyapunov_g);
  StateVec origin = {0, 0, 0};
  CHECK(drift(net, *net.lyapunov_g, origin) == Catch::Approx(10800.0));
}

TEST_CASE("birth-death drift with linear g is mu - gamma x") {
  ReactionNetwork net = parse_model(
      "species S; 0 -> S @ mass_action(10); S -> 0 @ mass_action(1);");
  Poly g = Poly::variable(1, 0);
  DriftExpansion ex = expand_drift(net, g);
  CHECK(ex.hill.empty());
  std::vector<unsigned> e1 = {1}, e0 = {0};
  CHECK(ex.polynomial.coefficient(e1) == Rational(-1));
  CHECK(ex.polynomial.coefficient(e0) == Rational(10));
  StateVec zero = {0};
  CHECK(drift(net, g, zero) == Catch::Approx(10.0));
}

TEST_CASE("drift of an empty reaction list is zero everywhere") {
  ReactionNetwork net;
  net.species = {{"S", false}};
  Poly g = Poly::variable(1, 0) * Poly::variable(1, 0);
  StateVec x = {17};
  CHECK(drift(net, g, x) == 0.0);
}

TEST_CASE("p53 drift expansion reproduces the derived coefficients") {
  // d(x) = -204 x_M x_p/(x_p + 0.01) - 0.096 x_M - 0.02 x_p
  //        - 0.093 x_pM + 10800   (pMdm2 coefficient -0.1 k5 = -0.093)
  ReactionNetwork net = p53();
  DriftExpansion ex = expand_drift(net, *net.lyapunov_g);
  const double tol = 1e-9;
  std::vector<unsigned> c0 = {0, 0, 0}, ep = {1, 0, 0}, epm = {0, 1, 0},
                        em = {0, 0, 1};
  CHECK(ex.polynomial.coefficient(c0).to_double() ==
        Catch::Approx(10800.0).epsilon(tol));
  CHECK(ex.polynomial.coefficient(ep).to_double() ==
        Catch::Approx(-0.02).epsilon(tol));
  CHECK(ex.polynomial.coefficient(epm).to_double() ==
        Catch::Approx(-0.093).epsilon(tol));
  CHECK(ex.polynomial.coefficient(em).to_double() ==
        Catch::Approx(-0.096).epsilon(tol));
  REQUIRE(ex.hill.size() == 1);
  CHECK(ex.hill[0].species == 0);
  CHECK(ex.hill[0].k == Rational(1, 100));
  CHECK(ex.hill[0].coeff.coefficient(em).to_double() ==
        Catch::Approx(-204.0).epsilon(tol));
}

TEST_CASE("drift supremum: p53 certificate gives exactly 10800") {
  ReactionNetwork net = p53();
  StateVec horizon(3, 1ll << 31);
  CHECK(drift_supremum(net, *net.lyapunov_g, horizon) == 10800.0);
}

TEST_CASE("drift supremum: linear certificate on a finite horizon") {
  ReactionNetwork net = parse_model(
      "species S; 0 -> S @ mass_action(10); S -> 0 @ mass_action(1);");
  Poly g = Poly::variable(1, 0);
  StateVec horizon = {1000};
  CHECK(drift_supremum(net, g, horizon) == Catch::Approx(10.0));
  Poly gconst = Poly::constant(1, Rational(3));
  CHECK(drift_supremum(net, gconst, horizon) == 0.0);
}

TEST_CASE("drift growing outward is rejected") {
  ReactionNetwork net = parse_model(
      "species S; 0 -> S @ mass_action(10); S -> 0 @ mass_action(1);");
  // g = -x^2 makes the death term contribute +2 gamma x^2
  Poly g = (Poly::variable(1, 0) * Poly::variable(1, 0)).negate();
  StateVec horizon = {100000};
  CHECK_THROWS_AS(drift_supremum(net, g, horizon), LyapunovError);
  CHECK_THROWS_AS(lyapunov_box(net, g, 0.1, horizon), LyapunovError);
}

TEST_CASE("lyapunov box: p53 axis bounds follow c/(coef * eps)") {
  ReactionNetwork net = p53();
  StateVec horizon(3, 1ll << 31);
  double c = 0.0;
  StateVec box = lyapunov_box(net, *net.lyapunov_g, 0.1, horizon, &c);
  CHECK(c == 10800.0);
  // 10800 / (0.02 * 0.1) = 5.4e6 (strict inequality shifts by one)
  CHECK(box[0] >= 5399998);
  CHECK(box[0] <= 5400000);
  // 108000 / 0.093 and 108000 / 0.096
  CHECK(box[1] >= 1161288);
  CHECK(box[1] <= 1161292);
  CHECK(box[2] >= 1124997);
  CHECK(box[2] <= 1125001);
}

TEST_CASE("lyapunov box: parallel birth-death sits inside the 70-cell grid") {
  ReactionNetwork net =
      parse_model(read_file(kModels + "/parallel_birth_death.model"));
  StateVec horizon(2, 1ll << 31);
  double c = 0.0;
  StateVec box = lyapunov_box(net, *net.lyapunov_g, 1e-4, horizon, &c);
  CHECK(c == Catch::Approx(10300.0));  // integer max of the separable drift
  for (int a = 0; a < 2; ++a) {
    CHECK(box[a] <= 8960);  // 70 cells of width 128
    CHECK(box[a] >= 3000);
  }
}

TEST_CASE("lyapunov box shrinks as epsilon_l grows") {
  ReactionNetwork net =
      parse_model(read_file(kModels + "/parallel_birth_death.model"));
  StateVec horizon(2, 1ll << 31);
  StateVec loose = lyapunov_box(net, *net.lyapunov_g, 0.5, horizon);
  StateVec tight = lyapunov_box(net, *net.lyapunov_g, 0.9, horizon);
  for (int a = 0; a < 2; ++a) CHECK(tight[a] <= loose[a]);
}

TEST_CASE("sampled states outside the box violate the set condition") {
  ReactionNetwork net =
      parse_model(read_file(kModels + "/parallel_birth_death.model"));
  StateVec horizon(2, 1ll << 31);
  double c = 0.0;
  StateVec box = lyapunov_box(net, *net.lyapunov_g, 1e-3, horizon, &c);
  const double threshold = c * (1e-3 - 1.0) / 1e-3;
  CounterRng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    int axis = static_cast<int>(rng.next() % 2);
    StateVec x(2);
    x[axis] = box[axis] + 1 + static_cast<long long>(rng.next() % 100000);
    x[1 - axis] = static_cast<long long>(rng.next() % (box[1 - axis] + 1));
    CHECK(drift(net, *net.lyapunov_g, x) <= threshold + 1e-9);
  }
}

TEST_CASE("constant g has no finite level sets") {
  ReactionNetwork net = parse_model(
      "species S; 0 -> S @ mass_action(10); S -> 0 @ mass_action(1);");
  Poly g = Poly::constant(1, Rational(1));
  StateVec horizon = {1 << 20};
  CHECK_THROWS_AS(lyapunov_box(net, g, 0.1, horizon), LyapunovError);
}
