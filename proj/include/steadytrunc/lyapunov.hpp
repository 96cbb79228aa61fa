#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "steadytrunc/model.hpp"
#include "steadytrunc/polynomial.hpp"

namespace steadytrunc {

// User-supplied certificate: polynomial g, mass threshold epsilon_l, and the
// computed drift supremum c.
struct LyapunovSpec {
  Poly g;
  double epsilon_l = 0.0;
  double c = 0.0;
};

// d(x) = sum_j alpha_j(x) (g(x + v_j) - g(x)), evaluated numerically.
inline double drift(const ReactionNetwork& net, const Poly& g,
                    std::span<const long long> x) {
  const int n = net.num_species();
  double s = 0.0;
  StateVec y(n);
  for (std::size_t j = 0; j < net.reactions.size(); ++j) {
    double a = propensity(net, static_cast<int>(j), x);
    if (a == 0.0) continue;
    for (int i = 0; i < n; ++i) y[i] = x[i] + net.reactions[j].change[i];
    s += a * (g.eval(y) - g.eval(x));
  }
  return s;
}

// Symbolic drift: a polynomial part plus terms of the form
// coeff_poly(x) * x_s/(x_s + K) from Custom laws.
struct DriftExpansion {
  struct HillTerm {
    Poly coeff;
    int species;
    Rational k;
  };
  Poly polynomial;
  std::vector<HillTerm> hill;
};

inline DriftExpansion expand_drift(const ReactionNetwork& net, const Poly& g) {
  const int n = net.num_species();
  DriftExpansion ex;
  ex.polynomial = Poly(n);
  for (std::size_t j = 0; j < net.reactions.size(); ++j) {
    const auto& r = net.reactions[j];
    Poly dg = g.shift(r.change) - g;
    Poly term = law_polynomial(net, static_cast<int>(j)) * dg;
    if (r.law.kind == RateLaw::Kind::Custom)
      ex.hill.push_back({std::move(term), r.law.hill_species, r.law.hill_k});
    else
      ex.polynomial = ex.polynomial + term;
  }
  return ex;
}

// Sound upper bound of the drift as a plain polynomial: the saturating
// factor lies in [0,1] on the orthant, so positive hill monomials keep it
// at 1 and negative ones drop to 0.
inline Poly drift_upper_bound_poly(const DriftExpansion& ex) {
  Poly u = ex.polynomial;
  for (const auto& h : ex.hill) {
    Poly keep(h.coeff.nvars());
    for (const auto& t : h.coeff.terms())
      if (!t.coeff.is_negative())
        keep = keep + Poly::constant(h.coeff.nvars(), t.coeff) *
                          [&] {
                            Poly m(h.coeff.nvars());
                            Poly v = Poly::constant(h.coeff.nvars(), Rational(1));
                            for (int a = 0; a < h.coeff.nvars(); ++a)
                              for (unsigned e = 0; e < t.exps[a]; ++e)
                                v = v * Poly::variable(h.coeff.nvars(), a);
                            return v;
                          }();
    u = u + keep;
  }
  return u;
}

namespace detail {

// Univariate restriction u_a(t) of a separable polynomial on one axis
// (monomials touching only that axis, constant excluded).
struct AxisQuadratic {
  double c1 = 0.0, c2 = 0.0;
  bool ok = true;  // degree <= 2
  double eval(double t) const { return c1 * t + c2 * t * t; }
};

inline AxisQuadratic axis_quadratic(const Poly& p, int axis) {
  AxisQuadratic q;
  for (const auto& t : p.terms()) {
    if (t.exps[axis] == 0) continue;
    if (t.exps[axis] == 1)
      q.c1 += t.coeff.to_double();
    else if (t.exps[axis] == 2)
      q.c2 += t.coeff.to_double();
    else
      q.ok = false;
  }
  return q;
}

struct AxisMax {
  double value = 0.0;
  long long argmax = 0;
  bool growing_at_horizon = false;
};

inline AxisMax axis_integer_max(const AxisQuadratic& q, long long H) {
  AxisMax m;
  auto consider = [&](long long t) {
    if (t < 0 || t > H) return;
    double v = q.eval(static_cast<double>(t));
    if (v > m.value || (v == m.value && t < m.argmax)) {
      m.value = v;
      m.argmax = t;
    }
  };
  m.value = 0.0;
  m.argmax = 0;
  consider(0);
  consider(H);
  if (q.c2 < 0.0) {
    double tstar = -q.c1 / (2.0 * q.c2);
    long long f = static_cast<long long>(std::floor(tstar));
    consider(f);
    consider(f + 1);
  }
  if (H >= 1 && q.eval(static_cast<double>(H)) >
                    q.eval(static_cast<double>(H - 1)) &&
      m.argmax == H)
    m.growing_at_horizon = true;
  return m;
}

// Substitute one declared mode combination into a polynomial.
inline Poly substitute_modes(const ReactionNetwork& net, const Poly& p,
                             const StateVec& combo) {
  Poly r = p;
  const auto axes = net.mode_axes();
  for (std::size_t m = 0; m < axes.size(); ++m)
    r = r.substitute_axis(axes[m], combo[m]);
  return r;
}

inline std::vector<StateVec> mode_combos_or_single(const ReactionNetwork& net) {
  if (net.mode_axes().empty()) return {StateVec{}};
  return net.mode_combos;
}

// Dense-ish deterministic scan lattice per axis: all small values, then
// geometric growth up to the horizon.
inline std::vector<long long> scan_values(long long H) {
  std::vector<long long> v;
  for (long long t = 0; t <= std::min<long long>(H, 16); ++t) v.push_back(t);
  long long t = 24;
  while (t < H) {
    v.push_back(t);
    t += t / 2;
  }
  if (H > 16) v.push_back(H);
  return v;
}

struct ScanResult {
  double max = -std::numeric_limits<double>::infinity();
  StateVec argmax;
  bool growing_at_horizon = false;
};

inline ScanResult grid_scan_max(const Poly& u, const std::vector<int>& axes,
                                const StateVec& horizon) {
  ScanResult r;
  const int n = u.nvars();
  std::vector<std::vector<long long>> vals;
  for (int a : axes) vals.push_back(scan_values(horizon[a]));
  StateVec x(n, 0);
  std::vector<std::size_t> pos(axes.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < axes.size(); ++i) x[axes[i]] = vals[i][pos[i]];
    double v = u.eval(x);
    if (v > r.max) {
      r.max = v;
      r.argmax = x;
    }
    int a = static_cast<int>(axes.size()) - 1;
    while (a >= 0 && ++pos[a] == vals[a].size()) pos[a--] = 0;
    if (a < 0) break;
  }
  // growing outward: argmax sits on the horizon face and the previous
  // lattice value on that axis is smaller
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (r.argmax.empty() || r.argmax[axes[i]] != horizon[axes[i]]) continue;
    if (vals[i].size() < 2) continue;
    StateVec y = r.argmax;
    y[axes[i]] = vals[i][vals[i].size() - 2];
    if (u.eval(y) < r.max) r.growing_at_horizon = true;
  }
  return r;
}

}  // namespace detail

// Upper bound on the drift over [0, horizon]^n: exact vertex/critical-point
// maximization for per-axis quadratics (after pinning each declared mode
// combination), dense grid scan otherwise. Errors when the drift grows
// outward at the horizon boundary.
inline double drift_supremum(const ReactionNetwork& net, const Poly& g,
                             const StateVec& horizon) {
  DriftExpansion ex = expand_drift(net, g);
  Poly ubound = drift_upper_bound_poly(ex);
  const auto agg = net.aggregated_axes();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& combo : detail::mode_combos_or_single(net)) {
    Poly u = detail::substitute_modes(net, ubound, combo);
    std::vector<unsigned> zero(u.nvars(), 0);
    double cst = u.coefficient(zero).to_double();
    bool exact = u.separable_over(agg);
    if (exact)
      for (int a : agg)
        if (u.degree_on_axis(a) > 2) exact = false;
    if (exact) {
      double total = cst;
      for (int a : agg) {
        auto q = detail::axis_quadratic(u, a);
        auto m = detail::axis_integer_max(q, horizon[a]);
        if (m.growing_at_horizon)
          throw LyapunovError(
              "not a valid Lyapunov certificate: drift grows outward at the "
              "horizon on axis " +
              net.species[a].name);
        total += m.value;
      }
      best = std::max(best, total);
    } else {
      auto r = detail::grid_scan_max(u, agg, horizon);
      if (r.growing_at_horizon)
        throw LyapunovError(
            "not a valid Lyapunov certificate: drift grows outward at the "
            "horizon");
      best = std::max(best, r.max);
    }
  }
  return best;
}

inline Poly default_lyapunov_g(const ReactionNetwork& net) {
  const int n = net.num_species();
  Poly g(n);
  for (int a : net.aggregated_axes())
    g = g + Poly::variable(n, a) * Poly::variable(n, a);
  return g;
}

// Smallest axis-aligned box guaranteed to contain
// C = { x : (eps/c) d(x) > eps - 1 }, found per axis by monotone bisection
// with the other coordinates at their drift-maximizing values. Entries for
// mode axes carry the largest declared value.
inline StateVec lyapunov_box(const ReactionNetwork& net, const Poly& g,
                             double epsilon_l, const StateVec& horizon,
                             double* c_out = nullptr) {
  if (!(epsilon_l > 0.0 && epsilon_l < 1.0))
    throw InputError("epsilon_l must lie in (0,1)");
  // finite level sets: g must grow along every aggregated axis ray
  const auto agg = net.aggregated_axes();
  for (int a : agg) {
    StateVec far_pt(net.num_species(), 0), mid(net.num_species(), 0);
    far_pt[a] = horizon[a];
    mid[a] = horizon[a] / 2;
    if (!(g.eval(far_pt) > g.eval(mid)))
      throw LyapunovError("level sets of g are not finite along axis " +
                          net.species[a].name);
  }
  double c = drift_supremum(net, g, horizon);
  if (!(c > 0.0))
    throw LyapunovError("drift supremum is not positive; certificate invalid");
  if (c_out) *c_out = c;
  const double threshold = c * (epsilon_l - 1.0) / epsilon_l;

  DriftExpansion ex = expand_drift(net, g);
  Poly ubound = drift_upper_bound_poly(ex);

  StateVec box(net.num_species(), 0);
  const auto mode_axes = net.mode_axes();
  for (std::size_t m = 0; m < mode_axes.size(); ++m) {
    long long mx = 0;
    for (const auto& combo : net.mode_combos) mx = std::max(mx, combo[m]);
    box[mode_axes[m]] = mx;
  }

  for (const auto& combo : detail::mode_combos_or_single(net)) {
    Poly u = detail::substitute_modes(net, ubound, combo);
    std::vector<unsigned> zero(u.nvars(), 0);
    double cst = u.coefficient(zero).to_double();
    bool exact = u.separable_over(agg);
    if (exact)
      for (int a : agg)
        if (u.degree_on_axis(a) > 2) exact = false;

    for (std::size_t ai = 0; ai < agg.size(); ++ai) {
      const int axis = agg[ai];
      const long long H = horizon[axis];
      std::function<double(long long)> phi;
      long long start;
      if (exact) {
        double rest = cst;
        for (int b : agg) {
          if (b == axis) continue;
          auto qb = detail::axis_quadratic(u, b);
          rest += detail::axis_integer_max(qb, horizon[b]).value;
        }
        auto qa = detail::axis_quadratic(u, axis);
        auto ma = detail::axis_integer_max(qa, H);
        if (ma.growing_at_horizon)
          throw LyapunovError("Lyapunov set not finite within horizon on axis " +
                              net.species[axis].name);
        start = ma.argmax;
        phi = [qa, rest](long long t) {
          return rest + qa.eval(static_cast<double>(t));
        };
      } else {
        std::vector<int> others;
        for (int b : agg)
          if (b != axis) others.push_back(b);
        start = 0;
        phi = [&net, u, others, &horizon, axis](long long t) {
          Poly pinned = u.substitute_axis(axis, t);
          if (others.empty()) {
            StateVec x(u.nvars(), 0);
            return pinned.eval(x);
          }
          auto r = detail::grid_scan_max(pinned, others, horizon);
          return r.max;
        };
      }
      if (phi(H) > threshold)
        throw LyapunovError("Lyapunov set not finite within horizon on axis " +
                            net.species[axis].name);
      long long good = -1, bad = H;
      if (exact) {
        if (phi(start) <= threshold) continue;  // nothing on this combo/axis
        good = start;
        long long off = 1;  // exponential probe, then bisect
        while (good + off < H && phi(good + off) > threshold) {
          good += off;
          off *= 2;
        }
        bad = std::min(H, good + off);
      } else {
        // coarse scan for the last satisfying lattice point
        auto cand = detail::scan_values(H);
        for (std::size_t q = 0; q < cand.size(); ++q)
          if (phi(cand[q]) > threshold) {
            good = cand[q];
            bad = q + 1 < cand.size() ? cand[q + 1] : H;
          }
        if (good < 0) continue;
      }
      while (bad - good > 1) {
        long long mid = good + (bad - good) / 2;
        if (phi(mid) > threshold)
          good = mid;
        else
          bad = mid;
      }
      box[axis] = std::max(box[axis], good);
    }
  }
  return box;
}

}  // namespace steadytrunc
