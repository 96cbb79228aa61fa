#include <catch2/catch_amalgamated.hpp>

#include "steadytrunc/polynomial.hpp"

using steadytrunc::Poly;
using steadytrunc::Rational;

namespace {
Poly x(int n, int a) { return Poly::variable(n, a); }
}  // namespace

TEST_CASE("polynomial algebra and evaluation") {
  // p = (x0 + 2)(x1 - 1)
  Poly p = (x(2, 0) + Poly::constant(2, Rational(2))) *
           (x(2, 1) + Poly::constant(2, Rational(-1)));
  std::vector<long long> pt = {3, 5};
  CHECK(p.eval(pt) == Catch::Approx(5.0 * 4.0));
  CHECK(p.total_degree() == 2);
  CHECK(p.degree_on_axis(0) == 1);
}

TEST_CASE("integer shift expands exactly") {
  // g = x^2, g(x+1) - g(x) = 2x + 1
  Poly g = x(1, 0) * x(1, 0);
  std::vector<long long> v = {1};
  Poly d = g.shift(v) - g;
  std::vector<long long> pt = {7};
  CHECK(d.eval(pt) == Catch::Approx(15.0));
  std::vector<unsigned> e1 = {1};
  CHECK(d.coefficient(e1) == Rational(2));
  std::vector<unsigned> e0 = {0};
  CHECK(d.coefficient(e0) == Rational(1));
}

TEST_CASE("axis substitution pins a variable") {
  Poly p = x(2, 0) * x(2, 1) + x(2, 1);
  Poly q = p.substitute_axis(0, 3);
  std::vector<long long> pt = {999, 2};
  CHECK(q.eval(pt) == Catch::Approx(3.0 * 2.0 + 2.0));
  CHECK(q.degree_on_axis(0) == 0);
}

TEST_CASE("separability detection") {
  std::vector<int> axes = {0, 1};
  Poly sep = x(2, 0) * x(2, 0) + x(2, 1);
  Poly cross = x(2, 0) * x(2, 1);
  CHECK(sep.separable_over(axes));
  CHECK_FALSE(cross.separable_over(axes));
}
