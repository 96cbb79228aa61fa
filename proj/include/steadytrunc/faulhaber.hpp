#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "steadytrunc/rational.hpp"

namespace steadytrunc {

// Closed-form power sums via Faulhaber polynomials.
//
// Coefficient tables are built once in exact rational arithmetic from the
// Bernoulli recurrence and converted to double; large-offset interval sums
// are expanded binomially around the interval start so every summand is
// nonnegative and no catastrophic cancellation occurs.
class Faulhaber {
 public:
  static constexpr int kMaxPower = 8;

  // S_p(n) = sum_{x=1..n} x^p, valid for n >= 0 (S_p(0) = 0).
  static double prefix_sum(int p, long long n) {
    if (n <= 0) return 0.0;
    const auto& c = table().coeff[p];  // degree p+1 polynomial, no constant
    double x = static_cast<double>(n);
    double s = 0.0;
    for (int d = p + 1; d >= 1; --d) s = s * x + c[d];
    return s * x;
  }

  // sum_{x=a..b} x^p with a >= 0. Stable for narrow slices at large offsets:
  // sum_k (a+k)^p = sum_q C(p,q) a^(p-q) * sum_{k=0..m} k^q, all terms >= 0.
  static double interval_sum(int p, long long a, long long b) {
    if (b < a) return 0.0;
    if (p == 0) return static_cast<double>(b - a + 1);
    if (a == 0) return prefix_sum(p, b);
    if (a == 1) return prefix_sum(p, b);
    const long long m = b - a;
    const double ad = static_cast<double>(a);
    double binom = 1.0;  // C(p, q)
    double apow = 1.0;   // a^q accumulated in reverse below
    // precompute a^(p-q) descending: start with a^p
    std::array<double, kMaxPower + 1> apows{};
    apows[0] = 1.0;
    for (int i = 1; i <= p; ++i) apows[i] = apows[i - 1] * ad;
    (void)apow;
    double s = 0.0;
    for (int q = 0; q <= p; ++q) {
      double inner = prefix_sum(q, m) + (q == 0 ? 1.0 : 0.0);  // sum_{k=0..m} k^q
      s += binom * apows[p - q] * inner;
      binom = binom * static_cast<double>(p - q) / static_cast<double>(q + 1);
    }
    return s;
  }

  // Exact rational coefficients of S_p as a polynomial in n (for tests):
  // S_p(n) = sum_{d=1..p+1} coeff[d] * n^d.
  static std::vector<Rational> exact_coefficients(int p) {
    return build_exact(p);
  }

 private:
  struct Table {
    // coeff[p][d] = double coefficient of n^d in S_p, d = 0..p+1 (coeff[0]=0)
    std::array<std::array<double, kMaxPower + 2>, kMaxPower + 1> coeff{};
  };

  static const Table& table() {
    static const Table t = [] {
      Table t;
      for (int p = 0; p <= kMaxPower; ++p) {
        auto c = build_exact(p);
        for (std::size_t d = 0; d < c.size(); ++d)
          t.coeff[p][d] = c[d].to_double();
      }
      return t;
    }();
    return t;
  }

  // Bernoulli numbers with the B1 = +1/2 convention, so that
  // S_p(n) = (1/(p+1)) sum_{j=0..p} C(p+1, j) B_j n^(p+1-j).
  static std::vector<Rational> bernoulli(int upto) {
    std::vector<Rational> B(upto + 1);
    B[0] = Rational(1);
    for (int m = 1; m <= upto; ++m) {
      // sum_{k=0..m} C(m+1,k) B-_k = 0 with B-_1 = -1/2; flip sign of B1 after.
      Rational s(0);
      Rational binom(1);
      for (int k = 0; k < m; ++k) {
        // binom = C(m+1, k)
        Rational bk = (k == 1) ? -B[1] : B[k];  // stored with +1/2, recur needs -1/2
        s += binom * bk;
        binom = binom * Rational(m + 1 - k) / Rational(k + 1);
      }
      Rational bm = -s / Rational(m + 1);
      B[m] = (m == 1) ? -bm : bm;  // store +1/2 at m=1
    }
    return B;
  }

  static std::vector<Rational> build_exact(int p) {
    auto B = bernoulli(p);
    std::vector<Rational> c(p + 2, Rational(0));
    Rational binom(1);  // C(p+1, j)
    for (int j = 0; j <= p; ++j) {
      c[p + 1 - j] = binom * B[j] / Rational(p + 1);
      binom = binom * Rational(p + 1 - j) / Rational(j + 1);
    }
    return c;
  }
};

}  // namespace steadytrunc
