#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "steadytrunc/aggregation.hpp"
#include "steadytrunc/model.hpp"
#include "steadytrunc/solver.hpp"
#include "steadytrunc/state.hpp"

namespace steadytrunc {

inline double poisson_pmf(double lambda, long long k) {
  if (k < 0) return 0.0;
  return std::exp(-lambda + static_cast<double>(k) * std::log(lambda) -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

// A network of uncoupled constant-birth / linear-death pairs has a product
// Poisson stationary distribution; returns the per-species rates when the
// structure matches (covers the birth-death and parallel birth-death
// benchmarks).
inline std::optional<std::vector<double>> product_poisson_rates(
    const ReactionNetwork& net) {
  const int n = net.num_species();
  std::vector<double> birth(n, 0.0), death(n, 0.0);
  std::vector<int> births(n, 0), deaths(n, 0);
  for (const auto& r : net.reactions) {
    if (r.law.kind != RateLaw::Kind::MassAction) return std::nullopt;
    int touched = -1;
    for (int a = 0; a < n; ++a) {
      if (r.consume[a] == 0 && r.produce[a] == 0) continue;
      if (touched >= 0) return std::nullopt;  // couples two species
      touched = a;
    }
    if (touched < 0) return std::nullopt;
    const double c = r.law.mass_action_c.to_double();
    if (r.consume[touched] == 0 && r.produce[touched] == 1) {
      birth[touched] = c;
      ++births[touched];
    } else if (r.consume[touched] == 1 && r.produce[touched] == 0) {
      death[touched] = c;
      ++deaths[touched];
    } else {
      return std::nullopt;
    }
  }
  std::vector<double> rates(n);
  for (int a = 0; a < n; ++a) {
    if (births[a] != 1 || deaths[a] != 1 || death[a] <= 0.0)
      return std::nullopt;
    rates[a] = birth[a] / death[a];
  }
  return rates;
}

inline double product_poisson_pmf(const std::vector<double>& rates,
                                  std::span<const long long> x) {
  double p = 1.0;
  for (std::size_t a = 0; a < rates.size(); ++a) p *= poisson_pmf(rates[a], x[a]);
  return p;
}

// Truncated-renormalized product Poisson over an explicit state set.
inline Distribution analytic_stationary(const std::vector<double>& rates,
                                        const StateIndex& states) {
  Distribution d;
  d.p.resize(states.size());
  double s = 0.0;
  for (int i = 0; i < states.size(); ++i) {
    d.p[i] = product_poisson_pmf(rates, states.state(i));
    s += d.p[i];
  }
  if (s <= 0.0) throw NumericError("reference mass vanishes on the box");
  for (double& v : d.p) v /= s;
  d.residual = 0.0;
  return d;
}

// Reference probability mass covered by the state set (not renormalized).
inline double reference_mass(const std::vector<double>& rates,
                             const StateIndex& states) {
  double s = 0.0;
  for (int i = 0; i < states.size(); ++i)
    s += product_poisson_pmf(rates, states.state(i));
  return s;
}

// Counter-based 64-bit generator (splitmix64 over a Weyl sequence); the
// stream is a pure function of (seed, counter), so runs are reproducible
// and replicas can be striped by seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in (0, 1]
  double uniform() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct SsaConfig {
  StateVec x0;
  double T = 1e5;
  double burn_in_frac = 0.1;
  std::uint64_t seed = 1;
  long long max_jumps = 400'000'000;
};

struct OccupancyEstimate {
  std::unordered_map<StateVec, double, StateVecHash> fraction;
  double T = 0.0;
  double burn_in = 0.0;
  long long jumps = 0;
};

// Exact-jump stochastic simulation (direct method); accumulates sojourn
// fractions per state after burn-in.
inline OccupancyEstimate ssa_occupancy(const ReactionNetwork& net,
                                       const SsaConfig& cfg) {
  if (cfg.T <= 0.0) throw InputError("ssa horizon must be positive");
  const double burn = cfg.T * cfg.burn_in_frac;
  if (burn >= cfg.T) throw InputError("burn-in must be below the horizon");
  OccupancyEstimate occ;
  occ.T = cfg.T;
  occ.burn_in = burn;
  CounterRng rng(cfg.seed);
  StateVec x = cfg.x0;
  if (x.empty()) x.assign(net.num_species(), 0);
  const int nR = static_cast<int>(net.reactions.size());
  std::vector<double> a(nR);
  double t = 0.0;
  const double span = cfg.T - burn;
  while (t < cfg.T) {
    double total = 0.0;
    for (int j = 0; j < nR; ++j) {
      a[j] = propensity(net, j, x);
      total += a[j];
    }
    double t_next;
    if (total <= 0.0) {
      t_next = cfg.T;  // absorbed
    } else {
      t_next = t - std::log(rng.uniform()) / total;
    }
    const double lo = std::max(t, burn);
    const double hi = std::min(t_next, cfg.T);
    if (hi > lo) occ.fraction[x] += (hi - lo) / span;
    if (t_next >= cfg.T || total <= 0.0) break;
    double u = rng.uniform() * total;
    int j = 0;
    for (; j < nR - 1; ++j) {
      u -= a[j];
      if (u <= 0.0) break;
    }
    for (int s = 0; s < net.num_species(); ++s)
      x[s] += net.reactions[j].change[s];
    t = t_next;
    if (++occ.jumps > cfg.max_jumps)
      throw NumericError("ssa exceeded the jump cap (possible explosion)");
  }
  return occ;
}

// Trajectory sampled on a uniform time grid (for qualitative checks).
inline std::vector<StateVec> ssa_trajectory(const ReactionNetwork& net,
                                            const StateVec& x0, double T,
                                            double dt, std::uint64_t seed,
                                            long long max_jumps = 400'000'000) {
  CounterRng rng(seed);
  StateVec x = x0;
  std::vector<StateVec> samples;
  const int nR = static_cast<int>(net.reactions.size());
  std::vector<double> a(nR);
  double t = 0.0, next_sample = 0.0;
  long long jumps = 0;
  while (t < T) {
    double total = 0.0;
    for (int j = 0; j < nR; ++j) {
      a[j] = propensity(net, j, x);
      total += a[j];
    }
    double t_next = total <= 0.0 ? T : t - std::log(rng.uniform()) / total;
    while (next_sample <= std::min(t_next, T)) {
      samples.push_back(x);
      next_sample += dt;
    }
    if (t_next >= T || total <= 0.0) break;
    double u = rng.uniform() * total;
    int j = 0;
    for (; j < nR - 1; ++j) {
      u -= a[j];
      if (u <= 0.0) break;
    }
    for (int s = 0; s < net.num_species(); ++s)
      x[s] += net.reactions[j].change[s];
    t = t_next;
    if (++jumps > max_jumps)
      throw NumericError("ssa exceeded the jump cap (possible explosion)");
  }
  return samples;
}

// Reference mass outside a truncation, from an occupancy estimate.
inline double outside_mass_estimate(const StateIndex& truncation,
                                    const OccupancyEstimate& occ) {
  double outside = 0.0;
  for (const auto& [x, f] : occ.fraction)
    if (!truncation.contains(x)) outside += f;
  return outside;
}

// Reference mass outside a truncation, from a product-Poisson reference.
inline double outside_mass_estimate(const StateIndex& truncation,
                                    const std::vector<double>& rates) {
  return 1.0 - reference_mass(rates, truncation);
}

// Explicit enumeration of sum alpha_j over a region; the oracle the
// closed-form lumped rates are checked against.
inline double brute_force_lumped_rate(const ReactionNetwork& net, int j,
                                      const MacroState& region,
                                      long long volume_cap = 1'000'000) {
  if (region.empty()) return 0.0;
  if (region.volume() > volume_cap)
    throw InputError("region volume exceeds the enumeration cap");
  const int n = region.dim();
  StateVec x = region.lower;
  double s = 0.0;
  while (true) {
    s += propensity(net, j, x);
    int a = n - 1;
    while (a >= 0 && ++x[a] > region.upper[a]) {
      x[a] = region.lower[a];
      --a;
    }
    if (a < 0) break;
  }
  return s;
}

}  // namespace steadytrunc
