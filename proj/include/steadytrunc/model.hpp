#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steadytrunc/errors.hpp"
#include "steadytrunc/polynomial.hpp"
#include "steadytrunc/rational.hpp"

namespace steadytrunc {

using StateVec = std::vector<long long>;

struct Species {
  std::string name;
  bool mode_flag = false;  // excluded from hypercube aggregation
};

// Propensity law of one reaction. Custom is a polynomial multiplied by a
// saturating factor x_s/(x_s + K); the factor has a coarse-level
// approximation hook used by the aggregation module.
struct RateLaw {
  enum class Kind { MassAction, Polynomial, Custom };
  Kind kind = Kind::MassAction;
  Rational mass_action_c;  // MassAction
  Poly poly;               // Polynomial / Custom base
  int hill_species = -1;   // Custom
  Rational hill_k;         // Custom
};

struct Reaction {
  StateVec consume;  // v-
  StateVec produce;  // v+
  StateVec change;   // v = v+ - v-
  RateLaw law;
};

struct ReactionNetwork {
  std::vector<Species> species;
  std::vector<Reaction> reactions;
  std::map<std::string, Rational> parameters;
  // Declared joint values of the mode-flagged species, in species order
  // restricted to mode axes. Empty when no species is mode-flagged.
  std::vector<StateVec> mode_combos;
  std::optional<Poly> lyapunov_g;  // from `lyapunov g = ...;`

  int num_species() const { return static_cast<int>(species.size()); }

  std::vector<int> aggregated_axes() const {
    std::vector<int> r;
    for (int i = 0; i < num_species(); ++i)
      if (!species[i].mode_flag) r.push_back(i);
    return r;
  }
  std::vector<int> mode_axes() const {
    std::vector<int> r;
    for (int i = 0; i < num_species(); ++i)
      if (species[i].mode_flag) r.push_back(i);
    return r;
  }
  int species_index(const std::string& name) const {
    for (int i = 0; i < num_species(); ++i)
      if (species[i].name == name) return i;
    return -1;
  }
};

namespace detail {
inline double binom_count(long long x, long long k) {
  if (x < k) return 0.0;
  double r = 1.0;
  for (long long i = 0; i < k; ++i)
    r *= static_cast<double>(x - i) / static_cast<double>(i + 1);
  return r;
}
}  // namespace detail

// Rate of reaction j in state x. Any insufficient reactant count yields 0.
inline double propensity(const ReactionNetwork& net, int j,
                         std::span<const long long> x) {
  const Reaction& r = net.reactions[j];
  const int n = net.num_species();
  for (int a = 0; a < n; ++a)
    if (x[a] < r.consume[a]) return 0.0;
  switch (r.law.kind) {
    case RateLaw::Kind::MassAction: {
      double v = r.law.mass_action_c.to_double();
      for (int a = 0; a < n; ++a)
        if (r.consume[a] > 0) v *= detail::binom_count(x[a], r.consume[a]);
      return v;
    }
    case RateLaw::Kind::Polynomial:
      return r.law.poly.eval(x);
    case RateLaw::Kind::Custom: {
      double base = r.law.poly.eval(x);
      double xs = static_cast<double>(x[r.law.hill_species]);
      return base * (xs / (xs + r.law.hill_k.to_double()));
    }
  }
  return 0.0;
}

// The propensity's polynomial part as an exact Poly over all species.
// For mass action this expands c * prod_l C(x_l, k_l); the result vanishes
// at every feasible-deficient integer point, so it agrees with the
// propensity on all of N^n. For Custom laws the saturating factor is NOT
// included; callers handle it separately.
inline Poly law_polynomial(const ReactionNetwork& net, int j) {
  const Reaction& r = net.reactions[j];
  const int n = net.num_species();
  switch (r.law.kind) {
    case RateLaw::Kind::MassAction: {
      Poly p = Poly::constant(n, r.law.mass_action_c);
      for (int a = 0; a < n; ++a) {
        long long k = r.consume[a];
        if (k == 0) continue;
        // C(x_a, k) = x_a (x_a - 1) ... (x_a - k + 1) / k!
        Poly ff = Poly::constant(n, Rational(1));
        Rational fact(1);
        for (long long i = 0; i < k; ++i) {
          ff = ff * (Poly::variable(n, a) +
                     Poly::constant(n, Rational(-i)));
          fact *= Rational(i + 1);
        }
        p = p * ff * Poly::constant(n, Rational(1) / fact);
      }
      // constant(n, 1/fact) multiplications stack; collapse via canonical mul
      return p;
    }
    case RateLaw::Kind::Polynomial:
    case RateLaw::Kind::Custom:
      return r.law.poly;
  }
  return Poly(n);
}

// Structural validation shared by the parser and programmatic construction.
inline void validate_network(const ReactionNetwork& net) {
  if (net.species.empty()) throw InputError("network has no species");
  if (net.reactions.empty()) throw InputError("network has no reactions");
  const int n = net.num_species();
  for (const auto& r : net.reactions) {
    if (static_cast<int>(r.consume.size()) != n ||
        static_cast<int>(r.produce.size()) != n ||
        static_cast<int>(r.change.size()) != n)
      throw InputError("reaction vector dimension mismatch");
    for (int a = 0; a < n; ++a) {
      if (r.consume[a] < 0 || r.produce[a] < 0)
        throw InputError("negative stoichiometry");
      if (r.change[a] != r.produce[a] - r.consume[a])
        throw InputError("change vector inconsistent with consume/produce");
    }
    if (r.law.kind == RateLaw::Kind::MassAction &&
        r.law.mass_action_c.is_negative())
      throw InputError("negative rate constant");
  }
  const auto modes = net.mode_axes();
  if (!modes.empty()) {
    if (net.mode_combos.empty())
      throw InputError("mode-flagged species need a declared value set");
    for (const auto& c : net.mode_combos)
      if (c.size() != modes.size())
        throw InputError("mode tuple dimension mismatch");
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (net.species[i].name == net.species[k].name)
        throw InputError("duplicate species name: " + net.species[i].name);
}

}  // namespace steadytrunc
