#pragma once

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "steadytrunc/generator.hpp"
#include "steadytrunc/solver.hpp"

namespace steadytrunc {

// State-wise [lower, upper] on the stationary probability conditioned on a
// truncation, from one solve per single-target reentry redirection.
struct IntervalResult {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> uniform;  // uniform-reentry solution, inside the envelope
  double total_width = 0.0;
  double max_width = 0.0;
  int targets = 0;
  std::vector<int> failed_targets;  // in-boundary targets whose solve failed
};

// Redirect the whole outflow to each in-boundary target in turn, solve, and
// envelope the solutions (the uniform-reentry solution included). Solves are
// independent and run on a small worker pool; results merge by target index.
inline IntervalResult statewise_bounds(const ReactionNetwork& net,
                                       const StateIndex& truncation,
                                       int threads = 0) {
  const int n = truncation.size();
  GeneratorBuild g = build_generator(net, truncation);
  IntervalResult res;
  if (g.outflow.empty()) {
    Distribution d = solve_stationary(g.Q, SolverMethod::Auto);
    res.lower = d.p;
    res.upper = d.p;
    res.uniform = d.p;
    res.total_width = 0.0;
    res.max_width = 0.0;
    res.targets = 0;
    return res;
  }
  std::vector<int> inb = inboundary_states(net, truncation);
  if (inb.empty())
    throw NumericError("outflow with empty in-boundary set");
  res.targets = static_cast<int>(inb.size());

  SparseGenerator uniform_q = apply_uniform_reentry(g.Q, g.outflow, inb);
  Distribution uni = solve_stationary(uniform_q, SolverMethod::Auto);
  res.uniform = uni.p;

  const SolverMethod per_target_method =
      n <= 600 ? SolverMethod::Dense : SolverMethod::SparseDirect;
  std::vector<std::vector<double>> sols(inb.size());
  std::vector<char> ok(inb.size(), 0);
  if (threads <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    const char* env = std::getenv("STEADYTRUNC_THREADS");
    if (env && *env) {
      int v = std::atoi(env);
      if (v > 0) hw = static_cast<unsigned>(v);
    }
    threads = static_cast<int>(hw ? hw : 1);
  }
  threads = std::min<int>(threads, static_cast<int>(inb.size()));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      std::size_t k = cursor.fetch_add(1);
      if (k >= inb.size()) return;
      try {
        SparseGenerator qb = redirect_to_target(g.Q, g.outflow, inb[k]);
        Distribution d = solve_stationary(qb, per_target_method);
        sols[k] = std::move(d.p);
        ok[k] = 1;
      } catch (const Error&) {
        ok[k] = 0;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  res.lower = uni.p;
  res.upper = uni.p;
  for (std::size_t k = 0; k < inb.size(); ++k) {
    if (!ok[k]) {
      res.failed_targets.push_back(inb[k]);
      continue;
    }
    for (int i = 0; i < n; ++i) {
      res.lower[i] = std::min(res.lower[i], sols[k][i]);
      res.upper[i] = std::max(res.upper[i], sols[k][i]);
    }
  }
  res.total_width = 0.0;
  res.max_width = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = res.upper[i] - res.lower[i];
    res.total_width += w;
    res.max_width = std::max(res.max_width, w);
  }
  return res;
}

}  // namespace steadytrunc
