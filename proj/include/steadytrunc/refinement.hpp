#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "steadytrunc/aggregation.hpp"
#include "steadytrunc/lyapunov.hpp"
#include "steadytrunc/solver.hpp"

namespace steadytrunc {

struct RefinementConfig {
  double epsilon = 1e-2;        // truncation threshold, in [0,1)
  int m = 7;                    // initial cell width 2^m on aggregated axes
  long long max_states = 4'000'000;
  SolverMethod method = SolverMethod::Auto;
  std::string reentry_scheme = "uniform";
  int stop_after_levels = 0;    // 0 = run to unit granularity
  bool verbose = false;
};

struct IterationReport {
  int level = 0;
  int states = 0;
  double residual = 0.0;
  double kept_mass = 1.0;  // mass of the kept subset (1.0 at the final level)
  int kept_cells = 0;
  bool scc_restricted = false;
  double wall_ms = 0.0;
};

struct RefineResult {
  Partition partition;       // granularity reached (unit cells on a full run)
  Distribution distribution; // over partition cells
  std::vector<IterationReport> reports;
  bool reached_unit = false;

  // Final truncation as micro-states; only valid when reached_unit.
  StateIndex truncation() const {
    std::vector<StateVec> states;
    states.reserve(partition.cells.size());
    for (const auto& c : partition.cells) states.push_back(c.lower);
    return StateIndex(std::move(states));
  }
};

// Grid of width-2^m cells anchored at the origin covering [0, box] on every
// aggregated axis (rounded up to whole cells), one stack per mode combo.
inline Partition initial_partition(const ReactionNetwork& net,
                                   const StateVec& box, int m,
                                   long long max_states = 4'000'000) {
  if (m < 0) throw InputError("initial exponent m must be >= 0");
  const int ns = net.num_species();
  const auto agg = net.aggregated_axes();
  Partition part;
  part.level = 1;
  part.width.assign(ns, 1);
  long long cells_per_stack = 1;
  std::vector<long long> counts(ns, 1);
  for (int a : agg) {
    part.width[a] = 1ll << m;
    counts[a] = (box[a] + part.width[a]) / part.width[a];  // ceil((box+1)/w)
    cells_per_stack *= counts[a];
  }
  const auto combos = net.mode_axes().empty()
                          ? std::vector<StateVec>{StateVec{}}
                          : net.mode_combos;
  const long long total = cells_per_stack * static_cast<long long>(combos.size());
  if (total > max_states)
    throw InputError("initial partition has " + std::to_string(total) +
                     " cells, above the cap; increase the initial exponent m");
  const auto mode_axes = net.mode_axes();
  for (const auto& combo : combos) {
    StateVec lo(ns, 0), up(ns, 0);
    for (std::size_t i = 0; i < mode_axes.size(); ++i)
      lo[mode_axes[i]] = up[mode_axes[i]] = combo[i];
    std::vector<long long> pos(ns, 0);
    while (true) {
      for (int a : agg) {
        lo[a] = pos[a] * part.width[a];
        up[a] = lo[a] + part.width[a] - 1;
      }
      part.cells.emplace_back(lo, up);
      int ai = static_cast<int>(agg.size()) - 1;
      while (ai >= 0 && ++pos[agg[ai]] == counts[agg[ai]]) pos[agg[ai--]] = 0;
      if (ai < 0) break;
    }
  }
  part.rebuild_index();
  return part;
}

// Smallest prefix of cells, sorted by probability descending (ties by
// lexicographic lower corner), whose cumulative mass reaches 1 - epsilon.
// Zero-probability cells are never kept.
inline std::vector<int> filter_states(const Distribution& dist,
                                      const Partition& part, double epsilon) {
  std::vector<int> order(part.size());
  for (int i = 0; i < part.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist.p[a] != dist.p[b]) return dist.p[a] > dist.p[b];
    return part.cells[a].lower < part.cells[b].lower;
  });
  std::vector<int> kept;
  double cum = 0.0;
  for (int i : order) {
    if (dist.p[i] <= 0.0) break;
    kept.push_back(i);
    cum += dist.p[i];
    if (cum >= 1.0 - epsilon) break;
  }
  return kept;
}

// Iterative refine-and-truncate: one stationary solve per level, keep the
// smallest mass-(1-epsilon) subset, split survivors, rebuild the lumped
// generator, plus one final solve at unit granularity.
inline RefineResult refine(const ReactionNetwork& net, const StateVec& box,
                           const RefinementConfig& cfg) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0))
    throw InputError("epsilon must lie in [0,1)");
  RefineResult result;
  Partition part = initial_partition(net, box, cfg.m, cfg.max_states);
  std::vector<double> warm;
  const int total_levels = cfg.m + 1;
  const int run_levels = cfg.stop_after_levels > 0
                             ? std::min(cfg.stop_after_levels, total_levels)
                             : total_levels;
  Distribution dist;
  for (int level = 1; level <= run_levels; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationReport rep;
    rep.level = level;
    rep.states = part.size();
    LumpedGenerator lumped = build_lumped_generator(net, part);
    auto inb = lumped_inboundary(net, part);
    SparseGenerator Q =
        apply_uniform_reentry(lumped.Q, lumped.outflow, inb);
    try {
      dist = solve_stationary(Q, cfg.method,
                              warm.empty() ? nullptr : &warm);
    } catch (const ReducibleChainError& e) {
      if (e.closed_class.empty()) throw;
      dist = solve_stationary_restricted(Q, e.closed_class, cfg.method);
      rep.scc_restricted = true;
      if (cfg.verbose)
        std::cerr << "[refine] level=" << level
                  << " reducible chain; restricted to closed class of "
                  << e.closed_class.size() << " cells\n";
    }
    rep.residual = dist.residual;
    const bool last = level == total_levels;
    if (!last && level < run_levels) {
      std::vector<int> kept = filter_states(dist, part, cfg.epsilon);
      if (kept.empty())
        throw NumericError("filter kept no cells; distribution degenerate");
      double kept_mass = 0.0;
      for (int i : kept) kept_mass += dist.p[i];
      rep.kept_cells = static_cast<int>(kept.size());
      rep.kept_mass = kept_mass;
      // split survivors; children inherit an even share as warm start
      Partition next;
      next.level = level + 1;
      next.width = part.width;
      const auto agg = net.aggregated_axes();
      for (int a : agg) next.width[a] = std::max(1ll, part.width[a] / 2);
      std::vector<std::pair<MacroState, double>> children;
      for (int i : kept) {
        auto kids = split(part.cells[i]);
        const double share = dist.p[i] / static_cast<double>(kids.size());
        for (auto& k : kids) children.emplace_back(std::move(k), share);
      }
      std::sort(children.begin(), children.end(),
                [](const auto& a, const auto& b) {
                  return a.first.lower < b.first.lower;
                });
      next.cells.reserve(children.size());
      warm.clear();
      warm.reserve(children.size());
      double wsum = 0.0;
      for (auto& [cell, w] : children) {
        next.cells.push_back(std::move(cell));
        warm.push_back(w);
        wsum += w;
      }
      if (wsum > 0.0)
        for (double& w : warm) w /= wsum;
      next.rebuild_index();
      part = std::move(next);
    } else {
      rep.kept_cells = part.size();
      rep.kept_mass = 1.0;
    }
    rep.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (cfg.verbose)
      std::cerr << "[refine] level=" << rep.level << " states=" << rep.states
                << " residual=" << rep.residual
                << " kept_cells=" << rep.kept_cells
                << " kept_mass=" << rep.kept_mass
                << " scc=" << rep.scc_restricted << " ms=" << rep.wall_ms
                << "\n";
    result.reports.push_back(rep);
    if (last || level == run_levels) {
      result.partition = std::move(part);
      result.distribution = std::move(dist);
      break;
    }
  }
  bool unit = true;
  for (long long w : result.partition.width)
    if (w != 1) unit = false;
  result.reached_unit = unit;
  return result;
}

}  // namespace steadytrunc
