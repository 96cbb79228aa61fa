#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>

#include "steadytrunc/faulhaber.hpp"

using steadytrunc::Faulhaber;

namespace {
// independent oracle: exact prefix sums in 128-bit integers
__int128 brute_prefix(int p, long long n) {
  __int128 s = 0;
  for (long long x = 1; x <= n; ++x) {
    __int128 t = 1;
    for (int i = 0; i < p; ++i) t *= x;
    s += t;
  }
  return s;
}
}  // namespace

TEST_CASE("prefix sums match exact enumeration for all powers") {
  for (int p = 0; p <= Faulhaber::kMaxPower; ++p) {
    for (long long n : {0ll, 1ll, 2ll, 3ll, 10ll, 57ll, 200ll}) {
      double exact = static_cast<double>(brute_prefix(p, n));
      double got = Faulhaber::prefix_sum(p, n);
      CHECK(got == Catch::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("interval sums are stable for narrow slices at large offsets") {
  // sum of x^2 over [a, a+3] with a = 2^20; reference via exact integers
  const long long a = 1ll << 20;
  __int128 exact = brute_prefix(2, a + 3) - brute_prefix(2, a - 1);
  double got = Faulhaber::interval_sum(2, a, a + 3);
  CHECK(got == Catch::Approx(static_cast<double>(exact)).epsilon(1e-12));

  // degree 8 at a moderate offset
  const long long b = 5000;
  __int128 exact8 = brute_prefix(8, b + 7) - brute_prefix(8, b - 1);
  double got8 = Faulhaber::interval_sum(8, b, b + 7);
  CHECK(got8 == Catch::Approx(static_cast<double>(exact8)).epsilon(1e-12));
}

TEST_CASE("interval sum handles degenerate ranges") {
  CHECK(Faulhaber::interval_sum(3, 5, 4) == 0.0);
  CHECK(Faulhaber::interval_sum(0, 3, 10) == 8.0);
  CHECK(Faulhaber::interval_sum(1, 0, 0) == 0.0);
  CHECK(Faulhaber::interval_sum(4, 7, 7) == Catch::Approx(std::pow(7.0, 4)));
}

TEST_CASE("exact coefficient tables reproduce known Faulhaber polynomials") {
  // S_2(n) = (2n^3 + 3n^2 + n)/6
  auto c2 = Faulhaber::exact_coefficients(2);
  CHECK(c2[3] == steadytrunc::Rational(1, 3));
  CHECK(c2[2] == steadytrunc::Rational(1, 2));
  CHECK(c2[1] == steadytrunc::Rational(1, 6));
  // S_1(n) = (n^2 + n)/2
  auto c1 = Faulhaber::exact_coefficients(1);
  CHECK(c1[2] == steadytrunc::Rational(1, 2));
  CHECK(c1[1] == steadytrunc::Rational(1, 2));
}
