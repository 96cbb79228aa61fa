#include <catch2/catch_amalgamated.hpp>

#include "steadytrunc/rational.hpp"

using steadytrunc::NumericError;
using steadytrunc::Rational;

TEST_CASE("rational arithmetic normalizes") {
  Rational a(2, 4);
  CHECK(a.num() == 1);
  CHECK(a.den() == 2);
  CHECK((a + Rational(1, 2)) == Rational(1));
  CHECK((Rational(7, 10) * Rational(10, 7)) == Rational(1));
  CHECK((Rational(1, 3) - Rational(1, 3)).is_zero());
  CHECK((Rational(-3, -6)) == Rational(1, 2));
  CHECK(Rational(1, -2).is_negative());
}

TEST_CASE("rational parse covers decimals and scientific notation") {
  CHECK(Rational::parse("123") == Rational(123));
  CHECK(Rational::parse("-0.75") == Rational(-3, 4));
  CHECK(Rational::parse("0.7") == Rational(7, 10));
  CHECK(Rational::parse("1e-4") == Rational(1, 10000));
  CHECK(Rational::parse("2.5e3") == Rational(2500));
  CHECK(Rational::parse("0.02") == Rational(1, 50));
  CHECK_THROWS_AS(Rational::parse("1..2"), steadytrunc::Error);
  CHECK_THROWS_AS(Rational::parse(""), steadytrunc::Error);
}

TEST_CASE("rational overflow is detected, not wrapped") {
  Rational big(INT64_MAX / 2, 1);
  CHECK_THROWS_AS(big * big, NumericError);
  CHECK_THROWS_AS(Rational(1, 0), NumericError);
}

TEST_CASE("rational pow") {
  CHECK(Rational(2, 3).pow(3) == Rational(8, 27));
  CHECK(Rational(5).pow(0) == Rational(1));
}
