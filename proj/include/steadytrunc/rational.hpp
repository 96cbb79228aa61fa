#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "steadytrunc/errors.hpp"

namespace steadytrunc {

// Exact rational over 64-bit integers with overflow-checked arithmetic.
// Used for parsed constants, polynomial coefficients and the Faulhaber
// tables; values are converted to double only at evaluation time.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}
  Rational(long long n, long long d) : num_(n), den_(d) {
    if (d == 0) throw NumericError("rational with zero denominator");
    normalize();
  }

  long long num() const { return num_; }
  long long den() const { return den_; }

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num_) /
                               static_cast<long double>(den_));
  }

  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw NumericError("rational division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }

  // Integer power with small nonnegative exponent.
  Rational pow(unsigned e) const {
    Rational r(1);
    Rational base = *this;
    while (e) {
      if (e & 1) r *= base;
      base = (e >>= 1) ? base * base : base;
    }
    return r;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Parses "123", "-0.75", "1e-4", "2.5e3". Exact: decimal digits and the
  // ten-power go into numerator/denominator directly.
  static Rational parse(const std::string& s) {
    std::size_t pos = 0;
    bool neg = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      neg = s[pos] == '-';
      ++pos;
    }
    __int128 num = 0;
    __int128 den = 1;
    bool any_digit = false;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      num = num * 10 + (s[pos] - '0');
      if (num > kMax128) throw NumericError("numeric literal too large: " + s);
      any_digit = true;
      ++pos;
    }
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        num = num * 10 + (s[pos] - '0');
        den *= 10;
        if (num > kMax128 || den > kMax128)
          throw NumericError("numeric literal too precise: " + s);
        any_digit = true;
        ++pos;
      }
    }
    if (!any_digit) throw InputError("malformed number: " + s);
    long long exp10 = 0;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      ++pos;
      bool eneg = false;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        eneg = s[pos] == '-';
        ++pos;
      }
      if (pos >= s.size()) throw InputError("malformed exponent: " + s);
      long long e = 0;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        e = e * 10 + (s[pos] - '0');
        if (e > 18) throw NumericError("exponent out of range: " + s);
        ++pos;
      }
      exp10 = eneg ? -e : e;
    }
    if (pos != s.size()) throw InputError("malformed number: " + s);
    for (; exp10 > 0; --exp10) {
      num *= 10;
      if (num > kMax128) throw NumericError("numeric literal too large: " + s);
    }
    for (; exp10 < 0; ++exp10) {
      den *= 10;
      if (den > kMax128) throw NumericError("numeric literal too small: " + s);
    }
    return from_i128(neg ? -num : num, den);
  }

 private:
  static __int128 i128(long long v) { return static_cast<__int128>(v); }
  static constexpr __int128 kMax128 =
      (static_cast<__int128>(1) << 100);  // headroom before normalization

  static Rational from_i128(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr __int128 lo = INT64_MIN, hi = INT64_MAX;
    if (n < lo || n > hi || d > hi)
      throw NumericError("rational arithmetic overflow");
    Rational r;
    r.num_ = static_cast<long long>(n);
    r.den_ = static_cast<long long>(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (den_ == 0) den_ = 1;
  }

  long long num_;
  long long den_;
};

}  // namespace steadytrunc
