#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "steadytrunc/faulhaber.hpp"
#include "steadytrunc/generator.hpp"
#include "steadytrunc/model.hpp"

namespace steadytrunc {

// Axis-aligned hypercube of micro-states, [lower, upper] inclusive over all
// species. Mode-flagged species are pinned (lower == upper on those axes),
// so a cell's mode assignment is just its pinned coordinates.
struct MacroState {
  StateVec lower;
  StateVec upper;

  MacroState() = default;
  MacroState(StateVec lo, StateVec up) : lower(std::move(lo)), upper(std::move(up)) {}

  int dim() const { return static_cast<int>(lower.size()); }
  bool empty() const {
    for (int a = 0; a < dim(); ++a)
      if (lower[a] > upper[a]) return true;
    return lower.empty();
  }
  long long volume() const {
    long long v = 1;
    for (int a = 0; a < dim(); ++a) v *= upper[a] - lower[a] + 1;
    return v;
  }
  bool contains(const StateVec& x) const {
    for (int a = 0; a < dim(); ++a)
      if (x[a] < lower[a] || x[a] > upper[a]) return false;
    return true;
  }
  friend bool operator==(const MacroState& a, const MacroState& b) {
    return a.lower == b.lower && a.upper == b.upper;
  }
};

// Eq.-style transition set: ((xi + v) cap xk) - v, always an interval.
inline std::optional<MacroState> transition_set(const MacroState& xi,
                                                const MacroState& xk,
                                                std::span<const long long> v) {
  const int n = xi.dim();
  MacroState t;
  t.lower.resize(n);
  t.upper.resize(n);
  for (int a = 0; a < n; ++a) {
    t.lower[a] = std::max(xi.lower[a], xk.lower[a] - v[a]);
    t.upper[a] = std::min(xi.upper[a], xk.upper[a] - v[a]);
    if (t.lower[a] > t.upper[a]) return std::nullopt;
  }
  return t;
}

// Micro-states of xi that leave xi under shift v. For axis-aligned unit
// shifts this is a single face; for diagonal shifts the set is xi minus the
// interior interval that stays, returned as a disjoint interval cover.
inline std::vector<MacroState> exit_set(const MacroState& xi,
                                        std::span<const long long> v) {
  const int n = xi.dim();
  bool zero = true;
  for (int a = 0; a < n; ++a)
    if (v[a] != 0) zero = false;
  if (zero) return {};
  MacroState stay;
  stay.lower.resize(n);
  stay.upper.resize(n);
  for (int a = 0; a < n; ++a) {
    stay.lower[a] = std::max(xi.lower[a], xi.lower[a] - v[a]);
    stay.upper[a] = std::min(xi.upper[a], xi.upper[a] - v[a]);
    if (stay.lower[a] > stay.upper[a]) return {xi};  // everything leaves
  }
  // Peel xi \ stay axis by axis into disjoint slabs.
  std::vector<MacroState> out;
  MacroState core = xi;
  for (int a = 0; a < n; ++a) {
    if (core.lower[a] < stay.lower[a]) {
      MacroState s = core;
      s.upper[a] = stay.lower[a] - 1;
      out.push_back(s);
    }
    if (stay.upper[a] < core.upper[a]) {
      MacroState s = core;
      s.lower[a] = stay.upper[a] + 1;
      out.push_back(s);
    }
    core.lower[a] = stay.lower[a];
    core.upper[a] = stay.upper[a];
  }
  return out;
}

namespace detail {

// Coefficients of C(x, k) as a polynomial in x, exact rationals -> double.
inline const std::vector<double>& binom_poly_coeffs(int k) {
  static std::vector<std::vector<double>> cache;
  if (k >= static_cast<int>(cache.size())) cache.resize(k + 1);
  if (cache[k].empty()) {
    std::vector<Rational> c = {Rational(1)};
    Rational fact(1);
    for (int i = 0; i < k; ++i) {
      // multiply by (x - i)
      std::vector<Rational> nc(c.size() + 1, Rational(0));
      for (std::size_t q = 0; q < c.size(); ++q) {
        nc[q + 1] += c[q];
        nc[q] += c[q] * Rational(-i);
      }
      c = std::move(nc);
      fact *= Rational(i + 1);
    }
    std::vector<double> d(c.size());
    for (std::size_t q = 0; q < c.size(); ++q)
      d[q] = (c[q] / fact).to_double();
    cache[k] = std::move(d);
  }
  return cache[k];
}

// sum_{x=lo..hi} C(x, k), lo >= k assumed (feasibility-clipped).
inline double binom_interval_sum(int k, long long lo, long long hi) {
  if (hi < lo) return 0.0;
  if (k == 0) return static_cast<double>(hi - lo + 1);
  if (k > Faulhaber::kMaxPower)
    throw NumericError("stoichiometry degree above 8 has no closed-form sum");
  const auto& c = binom_poly_coeffs(k);
  double s = 0.0;
  for (std::size_t q = 1; q < c.size(); ++q)
    if (c[q] != 0.0) s += c[q] * Faulhaber::interval_sum(static_cast<int>(q), lo, hi);
  // q = 0 term of C(x,k) is zero for k >= 1
  return s;
}

inline double poly_interval_sum(const Poly& p, const MacroState& region) {
  double total = 0.0;
  const int n = region.dim();
  for (const auto& t : p.terms()) {
    double m = t.coeff.to_double();
    for (int a = 0; a < n && m != 0.0; ++a) {
      unsigned e = t.exps[a];
      if (e > static_cast<unsigned>(Faulhaber::kMaxPower))
        throw NumericError("polynomial degree above 8 has no closed-form sum");
      m *= Faulhaber::interval_sum(static_cast<int>(e), region.lower[a],
                                   region.upper[a]);
    }
    total += m;
  }
  return total;
}

}  // namespace detail

// Sum of reaction j's propensity over all micro-states of the region,
// in closed form (Faulhaber power sums per axis). Custom laws use their
// registered coarse approximation above unit volume and the exact
// propensity at unit volume.
inline double lumped_rate(const ReactionNetwork& net, int j,
                          const MacroState& region_in) {
  if (region_in.empty()) return 0.0;
  const Reaction& r = net.reactions[j];
  const int n = net.num_species();
  MacroState region = region_in;
  for (int a = 0; a < n; ++a) {
    region.lower[a] = std::max(region.lower[a], r.consume[a]);
    if (region.lower[a] > region.upper[a]) return 0.0;
  }
  switch (r.law.kind) {
    case RateLaw::Kind::MassAction: {
      double s = r.law.mass_action_c.to_double();
      for (int a = 0; a < n && s != 0.0; ++a)
        s *= detail::binom_interval_sum(static_cast<int>(r.consume[a]),
                                        region.lower[a], region.upper[a]);
      return s;
    }
    case RateLaw::Kind::Polynomial:
      return detail::poly_interval_sum(r.law.poly, region);
    case RateLaw::Kind::Custom: {
      if (region.volume() == 1) return propensity(net, j, region.lower);
      // Coarse level: x/(x+K) treated as an indicator of x >= 1.
      MacroState clipped = region;
      int hs = r.law.hill_species;
      clipped.lower[hs] = std::max(clipped.lower[hs], 1ll);
      if (clipped.lower[hs] > clipped.upper[hs]) return 0.0;
      return detail::poly_interval_sum(r.law.poly, clipped);
    }
  }
  return 0.0;
}

// Regular grid of macro-states, one stack per declared mode combination.
// All cells at a level share the same per-axis width (powers of two on
// aggregated axes, 1 on mode axes), anchored at the origin.
struct Partition {
  std::vector<MacroState> cells;  // sorted by lower corner
  StateVec width;                 // per-axis cell width
  int level = 1;

  std::unordered_map<StateVec, int, StateVecHash> index;

  void rebuild_index() {
    std::sort(cells.begin(), cells.end(),
              [](const MacroState& a, const MacroState& b) {
                return a.lower < b.lower;
              });
    index.clear();
    index.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      index.emplace(cells[i].lower, static_cast<int>(i));
  }
  int find(const StateVec& corner) const {
    auto it = index.find(corner);
    return it == index.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(cells.size()); }

  long long covered_micro_states() const {
    long long s = 0;
    for (const auto& c : cells) s += c.volume();
    return s;
  }
};

// Halve every splittable axis at its floor midpoint; children partition the
// parent exactly. Unit axes are left alone.
inline std::vector<MacroState> split(const MacroState& cell) {
  const int n = cell.dim();
  std::vector<std::vector<std::pair<long long, long long>>> axis_parts(n);
  for (int a = 0; a < n; ++a) {
    long long w = cell.upper[a] - cell.lower[a] + 1;
    if (w >= 2) {
      long long h = w / 2;
      axis_parts[a] = {{cell.lower[a], cell.lower[a] + h - 1},
                       {cell.lower[a] + h, cell.upper[a]}};
    } else {
      axis_parts[a] = {{cell.lower[a], cell.upper[a]}};
    }
  }
  std::vector<MacroState> out;
  StateVec lo(n), up(n);
  std::vector<std::size_t> pos(n, 0);
  while (true) {
    for (int a = 0; a < n; ++a) {
      lo[a] = axis_parts[a][pos[a]].first;
      up[a] = axis_parts[a][pos[a]].second;
    }
    out.emplace_back(lo, up);
    int a = n - 1;
    while (a >= 0 && ++pos[a] == axis_parts[a].size()) pos[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

struct LumpedGenerator {
  SparseGenerator Q;
  std::vector<OutflowEntry> outflow;
};

namespace detail {

// Enumerate grid-aligned corners whose cell overlaps [slo, shi] on every
// axis; calls f(corner) for each. Mode axes must land exactly on a declared
// combination, which the caller checks via the partition / declared set.
template <typename F>
inline void for_each_overlapped_corner(const StateVec& slo, const StateVec& shi,
                                       const StateVec& width, F&& f) {
  const int n = static_cast<int>(slo.size());
  std::vector<std::vector<long long>> cand(n);
  for (int a = 0; a < n; ++a) {
    if (shi[a] < 0) return;
    long long w = width[a];
    long long c0 = std::max(0ll, slo[a]) / w * w;
    for (long long c = c0; c <= shi[a]; c += w) cand[a].push_back(c);
    if (cand[a].empty()) return;
  }
  StateVec corner(n);
  std::vector<std::size_t> pos(n, 0);
  while (true) {
    for (int a = 0; a < n; ++a) corner[a] = cand[a][pos[a]];
    f(corner);
    int a = n - 1;
    while (a >= 0 && ++pos[a] == cand[a].size()) pos[a--] = 0;
    if (a < 0) break;
  }
}

inline bool mode_combo_declared(const ReactionNetwork& net,
                                const std::vector<int>& mode_axes,
                                const StateVec& corner) {
  if (mode_axes.empty()) return true;
  for (const auto& combo : net.mode_combos) {
    bool eq = true;
    for (std::size_t m = 0; m < mode_axes.size(); ++m)
      if (corner[mode_axes[m]] != combo[m]) {
        eq = false;
        break;
      }
    if (eq) return true;
  }
  return false;
}

}  // namespace detail

// Lumped generator over the partition (off-diagonal rates per Eq.-style
// transition sets divided by source volume). Transitions into grid cells
// absent from the partition become outflow.
inline LumpedGenerator build_lumped_generator(const ReactionNetwork& net,
                                              const Partition& part) {
  const int npart = part.size();
  const int ns = net.num_species();
  const auto mode_axes = net.mode_axes();
  std::vector<std::tuple<int, int, double>> trip;
  std::unordered_map<long long, double> out_acc;  // (i * nR + j) -> rate
  const long long nR = static_cast<long long>(net.reactions.size());
  StateVec slo(ns), shi(ns);
  for (int i = 0; i < npart; ++i) {
    const MacroState& xi = part.cells[i];
    const double inv_vol = 1.0 / static_cast<double>(xi.volume());
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
      const auto& v = net.reactions[j].change;
      bool moves = false;
      for (int a = 0; a < ns; ++a) {
        slo[a] = xi.lower[a] + v[a];
        shi[a] = xi.upper[a] + v[a];
        if (v[a] != 0) moves = true;
      }
      if (!moves) continue;
      detail::for_each_overlapped_corner(
          slo, shi, part.width, [&](const StateVec& corner) {
            if (corner == xi.lower) return;  // stays in its own cell
            MacroState target(corner, corner);
            for (int a = 0; a < ns; ++a)
              target.upper[a] = corner[a] + part.width[a] - 1;
            auto tset = transition_set(xi, target, v);
            if (!tset) return;
            double rate =
                lumped_rate(net, static_cast<int>(j), *tset) * inv_vol;
            if (rate <= 0.0) return;
            int t = part.find(corner);
            if (t >= 0) {
              trip.emplace_back(i, t, rate);
            } else {
              if (!detail::mode_combo_declared(net, mode_axes, corner))
                throw InputError(
                    "reaction " + std::to_string(j + 1) +
                    " reaches an undeclared mode combination with positive "
                    "rate");
              out_acc[i * nR + static_cast<long long>(j)] += rate;
            }
          });
    }
  }
  std::vector<OutflowEntry> outflow;
  outflow.reserve(out_acc.size());
  for (const auto& [key, rate] : out_acc)
    outflow.push_back({static_cast<int>(key / nR),
                       static_cast<int>(key % nR), rate});
  std::sort(outflow.begin(), outflow.end(), [](const auto& a, const auto& b) {
    return std::tie(a.source, a.reaction) < std::tie(b.source, b.reaction);
  });
  return {SparseGenerator::from_triplets(npart, std::move(trip)),
          std::move(outflow)};
}

// Cells receiving probability flow from grid positions outside the
// partition (the lumped analogue of in-boundary micro-states).
inline std::vector<int> lumped_inboundary(const ReactionNetwork& net,
                                          const Partition& part) {
  const int npart = part.size();
  const int ns = net.num_species();
  const auto mode_axes = net.mode_axes();
  std::vector<int> result;
  StateVec slo(ns), shi(ns);
  for (int k = 0; k < npart; ++k) {
    const MacroState& xk = part.cells[k];
    bool in = false;
    for (std::size_t j = 0; j < net.reactions.size() && !in; ++j) {
      const auto& v = net.reactions[j].change;
      bool moves = false;
      for (int a = 0; a < ns; ++a) {
        slo[a] = xk.lower[a] - v[a];
        shi[a] = xk.upper[a] - v[a];
        if (v[a] != 0) moves = true;
      }
      if (!moves) continue;
      detail::for_each_overlapped_corner(
          slo, shi, part.width, [&](const StateVec& corner) {
            if (in || part.find(corner) >= 0) return;
            if (!detail::mode_combo_declared(net, mode_axes, corner)) return;
            MacroState phantom(corner, corner);
            for (int a = 0; a < ns; ++a)
              phantom.upper[a] = corner[a] + part.width[a] - 1;
            auto tset = transition_set(phantom, xk, v);
            if (!tset) return;
            if (lumped_rate(net, static_cast<int>(j), *tset) > 0.0) in = true;
          });
    }
    if (in) result.push_back(k);
  }
  return result;
}

}  // namespace steadytrunc
