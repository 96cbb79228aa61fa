#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "steadytrunc/model.hpp"
#include "steadytrunc/state.hpp"

namespace steadytrunc {

// A transition that leaves the truncation: source row, reaction, total rate.
struct OutflowEntry {
  int source;
  int reaction;
  double rate;
};

// Sparse conservative rate matrix. Off-diagonal entries are stored in CSR
// form; the diagonal is always the negative row sum of the off-diagonals,
// so rows sum to zero by construction. Rates leaving the state set are kept
// in a separate outflow list until a reentry scheme folds them in.
class SparseGenerator {
 public:
  SparseGenerator() = default;
  explicit SparseGenerator(int n) : n_(n), row_ptr_(n + 1, 0) {}

  // Build from triplets (row, col, rate); duplicates are summed.
  static SparseGenerator from_triplets(
      int n, std::vector<std::tuple<int, int, double>> trip) {
    std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) <
             std::tie(std::get<0>(b), std::get<1>(b));
    });
    SparseGenerator g(n);
    g.cols_.reserve(trip.size());
    g.vals_.reserve(trip.size());
    for (const auto& [r, c, v] : trip) {
      if (r == c) continue;  // self rates are void
      if (!g.cols_.empty() && g.row_of_last_ == r && g.cols_.back() == c) {
        g.vals_.back() += v;
      } else {
        for (int rr = g.row_of_last_ + 1; rr <= r; ++rr)
          g.row_ptr_[rr] = static_cast<int>(g.cols_.size());
        g.row_of_last_ = r;
        g.cols_.push_back(c);
        g.vals_.push_back(v);
      }
    }
    for (int rr = g.row_of_last_ + 1; rr <= n; ++rr)
      g.row_ptr_[rr] = static_cast<int>(g.cols_.size());
    g.recompute_diag();
    return g;
  }

  int size() const { return n_; }
  double diagonal(int i) const { return diag_[i]; }

  template <typename F>
  void for_each_offdiag(int row, F&& f) const {
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      f(cols_[k], vals_[k]);
  }
  template <typename F>
  void for_each_entry(F&& f) const {  // off-diagonals only
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        f(r, cols_[k], vals_[k]);
  }

  double entry(int r, int c) const {
    if (r == c) return diag_[r];
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (cols_[k] == c) return vals_[k];
    return 0.0;
  }

  int nnz_offdiag() const { return static_cast<int>(cols_.size()); }

  double max_abs_entry() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    for (double d : diag_) m = std::max(m, std::abs(d));
    return m;
  }

  // max row-sum deviation from zero (for invariant checks)
  double max_row_sum() const {
    double m = 0.0;
    for (int r = 0; r < n_; ++r) {
      double s = diag_[r], comp = 0.0;
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        double t = s + vals_[k];
        comp += std::abs(s) >= std::abs(vals_[k]) ? (s - t) + vals_[k]
                                                  : (vals_[k] - t) + s;
        s = t;
      }
      m = std::max(m, std::abs(s + comp));
    }
    return m;
  }

  // y = x Q (row vector times matrix)
  void apply_left(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i) y[i] = x[i] * diag_[i];
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        y[cols_[k]] += x[r] * vals_[k];
  }

 private:
  void recompute_diag() {
    diag_.assign(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
      double s = 0.0, comp = 0.0;  // Neumaier compensation
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        double v = vals_[k];
        double t = s + v;
        comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
      }
      diag_[r] = -(s + comp);
    }
  }

  int n_ = 0;
  int row_of_last_ = -1;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
};

struct GeneratorBuild {
  SparseGenerator Q;
  std::vector<OutflowEntry> outflow;
};

// Assemble the generator over an explicit state set. Transitions to states
// outside the set are recorded as outflow, not folded into the matrix.
inline GeneratorBuild build_generator(const ReactionNetwork& net,
                                      const StateIndex& states) {
  if (states.size() == 0) throw InputError("empty truncation set");
  const int n = states.size();
  const int ns = net.num_species();
  std::vector<std::tuple<int, int, double>> trip;
  std::vector<OutflowEntry> outflow;
  StateVec y(ns);
  for (int i = 0; i < n; ++i) {
    const StateVec& x = states.state(i);
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
      double a = propensity(net, static_cast<int>(j), x);
      if (a <= 0.0) continue;
      const auto& v = net.reactions[j].change;
      for (int s = 0; s < ns; ++s) y[s] = x[s] + v[s];
      int t = states.find(y);
      if (t >= 0) {
        if (t != i) trip.emplace_back(i, t, a);
      } else {
        outflow.push_back({i, static_cast<int>(j), a});
      }
    }
  }
  return {SparseGenerator::from_triplets(n, std::move(trip)),
          std::move(outflow)};
}

// States of the set with at least one incoming transition from outside:
// y such that x = y - v_j is outside the set, x >= 0 and alpha_j(x) > 0.
inline std::vector<int> inboundary_states(const ReactionNetwork& net,
                                          const StateIndex& states) {
  const int n = states.size();
  const int ns = net.num_species();
  std::vector<int> result;
  StateVec x(ns);
  for (int i = 0; i < n; ++i) {
    const StateVec& y = states.state(i);
    bool in = false;
    for (std::size_t j = 0; j < net.reactions.size() && !in; ++j) {
      const auto& v = net.reactions[j].change;
      bool valid = true;
      for (int s = 0; s < ns; ++s) {
        x[s] = y[s] - v[s];
        if (x[s] < 0) {
          valid = false;
          break;
        }
      }
      if (!valid || states.contains(x)) continue;
      if (propensity(net, static_cast<int>(j), x) > 0.0) in = true;
    }
    if (in) result.push_back(i);
  }
  return result;
}

// Uniform reentry: every outflow rate r from s is split evenly over the
// in-boundary states; a share targeting s itself is a self-loop and is
// absorbed into the diagonal. Rows sum to zero afterwards.
inline SparseGenerator apply_uniform_reentry(
    const SparseGenerator& Q, const std::vector<OutflowEntry>& outflow,
    const std::vector<int>& inboundary) {
  if (!outflow.empty() && inboundary.empty())
    throw NumericError(
        "outflow with empty in-boundary: truncation closed incorrectly");
  std::vector<std::tuple<int, int, double>> trip;
  Q.for_each_entry([&](int r, int c, double v) { trip.emplace_back(r, c, v); });
  if (!inboundary.empty()) {
    const double inv = 1.0 / static_cast<double>(inboundary.size());
    for (const auto& o : outflow) {
      const double share = o.rate * inv;
      for (int b : inboundary)
        if (b != o.source) trip.emplace_back(o.source, b, share);
    }
  }
  return SparseGenerator::from_triplets(Q.size(), std::move(trip));
}

// Redirect the full outflow of every source to one target state (used by
// the bounds module); self-loops are dropped as above.
inline SparseGenerator redirect_to_target(
    const SparseGenerator& Q, const std::vector<OutflowEntry>& outflow,
    int target) {
  std::vector<std::tuple<int, int, double>> trip;
  Q.for_each_entry([&](int r, int c, double v) { trip.emplace_back(r, c, v); });
  for (const auto& o : outflow)
    if (o.source != target) trip.emplace_back(o.source, target, o.rate);
  return SparseGenerator::from_triplets(Q.size(), std::move(trip));
}

// Strongly connected components (Tarjan, iterative). Returns component id
// per node; ids are in reverse topological order of the condensation.
inline std::vector<int> strongly_connected_components(const SparseGenerator& Q,
                                                      int* num_components) {
  const int n = Q.size();
  std::vector<int> comp(n, -1), low(n, 0), disc(n, -1), stk;
  std::vector<bool> on_stack(n, false);
  int time = 0, ncomp = 0;
  struct Frame {
    int v;
    int edge;
  };
  std::vector<std::vector<int>> adj(n);
  Q.for_each_entry([&](int r, int c, double v) {
    if (v > 0.0) adj[r].push_back(c);
  });
  std::vector<Frame> call;
  for (int s = 0; s < n; ++s) {
    if (disc[s] != -1) continue;
    call.push_back({s, 0});
    while (!call.empty()) {
      auto& f = call.back();
      int v = f.v;
      if (f.edge == 0) {
        disc[v] = low[v] = time++;
        stk.push_back(v);
        on_stack[v] = true;
      }
      if (f.edge < static_cast<int>(adj[v].size())) {
        int w = adj[v][f.edge++];
        if (disc[w] == -1) {
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], disc[w]);
        }
      } else {
        if (low[v] == disc[v]) {
          while (true) {
            int w = stk.back();
            stk.pop_back();
            on_stack[w] = false;
            comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
        call.pop_back();
        if (!call.empty()) {
          int parent = call.back().v;
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  if (num_components) *num_components = ncomp;
  return comp;
}

// Largest closed communicating class: the biggest SCC with no edge leaving
// it. Ties break toward the class containing the smallest state index.
inline std::vector<int> largest_closed_class(const SparseGenerator& Q) {
  int ncomp = 0;
  auto comp = strongly_connected_components(Q, &ncomp);
  std::vector<bool> closed(ncomp, true);
  Q.for_each_entry([&](int r, int c, double v) {
    if (v > 0.0 && comp[r] != comp[c]) closed[comp[r]] = false;
  });
  std::vector<int> size(ncomp, 0), first(ncomp, Q.size());
  for (int i = 0; i < Q.size(); ++i) {
    ++size[comp[i]];
    first[comp[i]] = std::min(first[comp[i]], i);
  }
  int best = -1;
  for (int c = 0; c < ncomp; ++c) {
    if (!closed[c]) continue;
    if (best == -1 || size[c] > size[best] ||
        (size[c] == size[best] && first[c] < first[best]))
      best = c;
  }
  std::vector<int> members;
  if (best >= 0)
    for (int i = 0; i < Q.size(); ++i)
      if (comp[i] == best) members.push_back(i);
  return members;
}

// Restriction of Q to a subset of rows/columns (subset must be closed for
// the result to stay conservative).
inline SparseGenerator restrict_generator(const SparseGenerator& Q,
                                          const std::vector<int>& subset) {
  std::vector<int> map(Q.size(), -1);
  for (std::size_t k = 0; k < subset.size(); ++k) map[subset[k]] = static_cast<int>(k);
  std::vector<std::tuple<int, int, double>> trip;
  Q.for_each_entry([&](int r, int c, double v) {
    if (map[r] >= 0 && map[c] >= 0) trip.emplace_back(map[r], map[c], v);
  });
  return SparseGenerator::from_triplets(static_cast<int>(subset.size()),
                                        std::move(trip));
}

}  // namespace steadytrunc
