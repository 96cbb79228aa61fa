#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "steadytrunc/rational.hpp"

namespace steadytrunc {

// Multivariate polynomial with exact rational coefficients.
// Exponents are kept per variable; terms are canonical (sorted, merged).
class Poly {
 public:
  struct Term {
    Rational coeff;
    std::vector<unsigned> exps;  // length nvars
  };

  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, Rational c) {
    Poly p(nvars);
    if (!c.is_zero()) p.terms_.push_back({c, std::vector<unsigned>(nvars, 0)});
    return p;
  }
  static Poly variable(int nvars, int axis, Rational c = Rational(1)) {
    Poly p(nvars);
    std::vector<unsigned> e(nvars, 0);
    e[axis] = 1;
    if (!c.is_zero()) p.terms_.push_back({c, std::move(e)});
    return p;
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  unsigned degree_on_axis(int axis) const {
    unsigned d = 0;
    for (const auto& t : terms_) d = std::max(d, t.exps[axis]);
    return d;
  }
  unsigned total_degree() const {
    unsigned d = 0;
    for (const auto& t : terms_) {
      unsigned s = 0;
      for (unsigned e : t.exps) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  // True when every term involves at most one of the given axes.
  bool separable_over(std::span<const int> axes) const {
    for (const auto& t : terms_) {
      int touched = 0;
      for (int a : axes)
        if (t.exps[a] > 0) ++touched;
      if (touched > 1) return false;
    }
    return true;
  }

  Poly operator+(const Poly& o) const {
    Poly r(nvars_);
    r.terms_ = terms_;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    r.canonicalize();
    return r;
  }
  Poly operator-(const Poly& o) const { return *this + o.negate(); }
  Poly negate() const {
    Poly r(nvars_);
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r(nvars_);
    r.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        Term t;
        t.coeff = a.coeff * b.coeff;
        t.exps.resize(nvars_);
        for (int i = 0; i < nvars_; ++i) t.exps[i] = a.exps[i] + b.exps[i];
        r.terms_.push_back(std::move(t));
      }
    r.canonicalize();
    return r;
  }
  Poly operator*(const Rational& c) const {
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff = t.coeff * c;
    r.canonicalize();
    return r;
  }

  // Substitute x -> x + v (integer shift), expanding binomially. Exact.
  Poly shift(std::span<const long long> v) const {
    Poly r(nvars_);
    for (const auto& t : terms_) {
      Poly prod = Poly::constant(nvars_, t.coeff);
      for (int a = 0; a < nvars_; ++a) {
        if (t.exps[a] == 0) continue;
        Poly axis_poly(nvars_);
        if (v[a] == 0) {
          std::vector<unsigned> e(nvars_, 0);
          e[a] = t.exps[a];
          axis_poly.terms_.push_back({Rational(1), std::move(e)});
        } else {
          // (x_a + v)^e = sum_q C(e,q) v^(e-q) x_a^q
          unsigned e = t.exps[a];
          Rational binom(1);
          for (unsigned q = 0; q <= e; ++q) {
            // binom = C(e, q)
            Rational c = binom * Rational(v[a]).pow(e - q);
            if (!c.is_zero()) {
              std::vector<unsigned> ex(nvars_, 0);
              ex[a] = q;
              axis_poly.terms_.push_back({c, std::move(ex)});
            }
            binom = binom * Rational(static_cast<long long>(e - q)) /
                    Rational(static_cast<long long>(q + 1));
          }
        }
        prod = prod * axis_poly;
      }
      r.terms_.insert(r.terms_.end(), prod.terms_.begin(), prod.terms_.end());
    }
    r.canonicalize();
    return r;
  }

  // Pin one axis to an integer value; the axis keeps exponent 0 afterwards.
  Poly substitute_axis(int axis, long long value) const {
    Poly r(nvars_);
    for (const auto& t : terms_) {
      Term nt = t;
      if (t.exps[axis] > 0) {
        nt.coeff = t.coeff * Rational(value).pow(t.exps[axis]);
        nt.exps[axis] = 0;
      }
      if (!nt.coeff.is_zero()) r.terms_.push_back(std::move(nt));
    }
    r.canonicalize();
    return r;
  }

  double eval(std::span<const long long> x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double m = t.coeff.to_double();
      for (int a = 0; a < nvars_; ++a)
        for (unsigned e = 0; e < t.exps[a]; ++e) m *= static_cast<double>(x[a]);
      s += m;
    }
    return s;
  }

  // Coefficient of the given exponent vector (zero if absent).
  Rational coefficient(std::span<const unsigned> exps) const {
    for (const auto& t : terms_) {
      bool eq = true;
      for (int a = 0; a < nvars_; ++a)
        if (t.exps[a] != exps[a]) {
          eq = false;
          break;
        }
      if (eq) return t.coeff;
    }
    return Rational(0);
  }

 private:
  void canonicalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.exps < b.exps; });
    std::vector<Term> merged;
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().exps == t.exps)
        merged.back().coeff += t.coeff;
      else
        merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coeff.is_zero(); }),
                 merged.end());
    terms_ = std::move(merged);
  }

  int nvars_;
  std::vector<Term> terms_;
};

}  // namespace steadytrunc
