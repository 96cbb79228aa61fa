#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "steadytrunc/bounds.hpp"
#include "steadytrunc/oracle.hpp"
#include "steadytrunc/parse.hpp"

using namespace steadytrunc;

namespace {
ReactionNetwork birth_death(const std::string& mu, const std::string& gamma) {
  return parse_model("species S; 0 -> S @ mass_action(" + mu +
                     "); S -> 0 @ mass_action(" + gamma + ");");
}
}  // namespace

TEST_CASE("closed truncation gives zero-width intervals") {
  ReactionNetwork net = parse_model(
      "modes A, B in {(1,0),(0,1)};"
      "A -> B @ mass_action(1); B -> A @ mass_action(3);");
  StateIndex st(std::vector<StateVec>{{1, 0}, {0, 1}});
  IntervalResult r = statewise_bounds(net, st);
  CHECK(r.targets == 0);
  CHECK(r.total_width == 0.0);
  int a_active = st.find({1, 0});
  REQUIRE(a_active >= 0);
  CHECK(r.lower[a_active] == Catch::Approx(0.75));
  CHECK(r.lower == r.upper);
}

TEST_CASE("envelope contains the uniform-reentry solution") {
  ReactionNetwork net = birth_death("20", "1");
  StateIndex st = StateIndex::box({5}, {40});
  IntervalResult r = statewise_bounds(net, st);
  GeneratorBuild g = build_generator(net, st);
  auto inb = inboundary_states(net, st);
  Distribution uni =
      solve_stationary(apply_uniform_reentry(g.Q, g.outflow, inb));
  REQUIRE(static_cast<int>(r.lower.size()) == st.size());
  for (int i = 0; i < st.size(); ++i) {
    CHECK(r.lower[i] <= uni.p[i] + 1e-12);
    CHECK(r.upper[i] >= uni.p[i] - 1e-12);
    CHECK(r.lower[i] <= r.upper[i]);
    CHECK(r.lower[i] >= -1e-15);
    CHECK(r.upper[i] <= 1.0 + 1e-12);
  }
  CHECK(r.failed_targets.empty());
  // bound vectors bracket a normalized distribution
  double lo_sum = 0.0, hi_sum = 0.0;
  for (int i = 0; i < st.size(); ++i) {
    lo_sum += r.lower[i];
    hi_sum += r.upper[i];
  }
  CHECK(lo_sum <= 1.0 + 1e-12);
  CHECK(hi_sum >= 1.0 - 1e-12);
}

TEST_CASE("wider truncations tighten the intervals") {
  ReactionNetwork net = birth_death("20", "1");
  IntervalResult narrow = statewise_bounds(net, StateIndex::box({2}, {35}));
  IntervalResult wide = statewise_bounds(net, StateIndex::box({2}, {70}));
  CHECK(narrow.total_width > 0.0);
  CHECK(wide.total_width < narrow.total_width);
  CHECK(wide.max_width <= narrow.max_width + 1e-15);
}

TEST_CASE("bounds are deterministic across worker counts") {
  ReactionNetwork net = birth_death("15", "1");
  StateIndex st = StateIndex::box({2}, {50});
  IntervalResult one = statewise_bounds(net, st, 1);
  IntervalResult four = statewise_bounds(net, st, 4);
  REQUIRE(one.lower.size() == four.lower.size());
  for (std::size_t i = 0; i < one.lower.size(); ++i) {
    CHECK(one.lower[i] == four.lower[i]);
    CHECK(one.upper[i] == four.upper[i]);
  }
}

TEST_CASE("outside mass estimates: analytic and occupancy references") {
  std::vector<double> rates = {20.0};
  StateIndex st = StateIndex::box({0}, {60});
  double outside = outside_mass_estimate(st, rates);
  CHECK(outside > 0.0);
  CHECK(outside < 1e-10);  // Poisson(20) far tail
  StateIndex full_support = StateIndex::box({0}, {400});
  CHECK(outside_mass_estimate(full_support, rates) ==
        Catch::Approx(0.0).margin(1e-12));
  OccupancyEstimate occ;
  occ.fraction[{10}] = 0.5;
  occ.fraction[{100}] = 0.5;
  CHECK(outside_mass_estimate(st, occ) == Catch::Approx(0.5));
}
