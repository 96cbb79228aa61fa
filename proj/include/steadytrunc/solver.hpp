#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <optional>
#include <vector>

#include "steadytrunc/generator.hpp"

namespace steadytrunc {

enum class SolverMethod { Auto, Dense, Iterative, SparseDirect };

// Normalized stationary distribution plus the achieved ||pi Q||_inf.
struct Distribution {
  std::vector<double> p;
  double residual = 0.0;

  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
};

namespace detail {

// Short power iteration on the uniformized chain; used to pick which
// stationary equation the normalization row replaces and as a default
// initial guess.
inline std::vector<double> power_iteration_estimate(const SparseGenerator& Q,
                                                    int iters = 20) {
  const int n = Q.size();
  double lam = Q.max_abs_entry() * 1.01;
  std::vector<double> x(n, 1.0 / n), y(n);
  if (lam <= 0.0) return x;
  for (int it = 0; it < iters; ++it) {
    Q.apply_left(x, y);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] += y[i] / lam;
      if (x[i] < 0.0) x[i] = 0.0;
      s += x[i];
    }
    if (s <= 0.0) return std::vector<double>(n, 1.0 / n);
    for (double& v : x) v /= s;
  }
  return x;
}

inline int argmax_index(const std::vector<double>& v) {
  int k = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[k]) k = static_cast<int>(i);
  return k;
}

// A = Q^T with row k replaced by ones (the normalization equation).
inline Eigen::SparseMatrix<double> normalized_system(const SparseGenerator& Q,
                                                     int k) {
  const int n = Q.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(Q.nnz_offdiag() + 2 * n);
  Q.for_each_entry([&](int r, int c, double v) {
    if (c != k) trip.emplace_back(c, r, v);
  });
  for (int i = 0; i < n; ++i) {
    if (i != k) trip.emplace_back(i, i, Q.diagonal(i));
    trip.emplace_back(k, i, 1.0);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

struct RawSolve {
  std::vector<double> p;
  bool ok = false;
};

inline RawSolve solve_dense(const SparseGenerator& Q, int k) {
  const int n = Q.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Q.for_each_entry([&](int r, int c, double v) {
    if (c != k) A(c, r) = v;
  });
  for (int i = 0; i < n; ++i) {
    if (i != k) A(i, i) = Q.diagonal(i);
    A(k, i) = 1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(k) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = lu.solve(b);
  RawSolve r;
  r.p.assign(x.data(), x.data() + n);
  r.ok = x.allFinite();
  return r;
}

inline RawSolve solve_iterative(const SparseGenerator& Q, int k,
                                const std::vector<double>& guess) {
  const int n = Q.size();
  auto A = normalized_system(Q, k);
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                  Eigen::DiagonalPreconditioner<double>>
      solver;
  solver.setMaxIterations(10000);
  solver.setTolerance(1e-16);
  solver.compute(A);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(k) = 1.0;
  Eigen::Map<const Eigen::VectorXd> g(guess.data(), n);
  Eigen::VectorXd x = solver.solveWithGuess(b, g);
  RawSolve r;
  r.p.assign(x.data(), x.data() + n);
  r.ok = x.allFinite();
  return r;
}

inline RawSolve solve_sparse_direct(const SparseGenerator& Q, int k) {
  const int n = Q.size();
  auto A = normalized_system(Q, k);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  RawSolve r;
  if (lu.info() != Eigen::Success) return r;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(k) = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  r.p.assign(x.data(), x.data() + n);
  r.ok = x.allFinite();
  return r;
}

}  // namespace detail

// Solve pi Q = 0, sum(pi) = 1 on a conservative generator.
//
// Auto picks dense LU up to 5000 states and BiCGSTAB with Jacobi
// preconditioning above (cap 10,000 iterations, absolute tolerance 1e-16),
// escalating to a sparse direct factorization if the Krylov run fails to
// meet the residual contract. Returns pi with ||pi Q||_inf <= 1e-10 max|Q|
// or throws; negative entries beyond -1e-12 signal a reducible chain and
// raise ReducibleChainError carrying the largest closed communicating
// class.
inline Distribution solve_stationary(
    const SparseGenerator& Q, SolverMethod method = SolverMethod::Auto,
    const std::vector<double>* warm_start = nullptr) {
  const int n = Q.size();
  if (n == 0) throw InputError("empty generator");
  const double qmax = Q.max_abs_entry();
  if (qmax == 0.0) {
    Distribution d;
    d.p.assign(n, 1.0 / n);
    d.residual = 0.0;
    return d;
  }
  const double tol = 1e-10 * qmax;

  std::vector<double> estimate = detail::power_iteration_estimate(Q);
  const int k = detail::argmax_index(estimate);
  const std::vector<double>& guess = warm_start ? *warm_start : estimate;

  auto finalize = [&](detail::RawSolve raw,
                      bool may_escalate) -> std::optional<Distribution> {
    if (!raw.ok) return std::nullopt;
    double mn = 0.0;
    for (double v : raw.p) mn = std::min(mn, v);
    if (mn < -1e-12) {
      if (may_escalate) return std::nullopt;
      auto cls = largest_closed_class(Q);
      if (static_cast<int>(cls.size()) < n)
        throw ReducibleChainError(
            "stationary solution has negative entries; chain appears "
            "reducible",
            cls);
      throw NumericError("stationary solution has negative entries", mn);
    }
    Distribution d;
    d.p = std::move(raw.p);
    double s = 0.0;
    for (double& v : d.p) {
      if (v < 0.0) v = 0.0;
      s += v;
    }
    if (s <= 0.0) return std::nullopt;
    for (double& v : d.p) v /= s;
    std::vector<double> y(n);
    Q.apply_left(d.p, y);
    double res = 0.0;
    for (double v : y) res = std::max(res, std::abs(v));
    d.residual = res;
    if (res > tol) return std::nullopt;
    return d;
  };

  auto fail = [&]() -> Distribution {
    // Diagnose before giving up: reducibility is the common structural cause.
    auto cls = largest_closed_class(Q);
    if (static_cast<int>(cls.size()) < n)
      throw ReducibleChainError(
          "stationary solve failed residual check; chain appears reducible",
          cls);
    throw NumericError("stationary solver did not reach residual tolerance " +
                           std::to_string(tol),
                       tol);
  };

  switch (method) {
    case SolverMethod::Dense: {
      auto d = finalize(detail::solve_dense(Q, k), false);
      return d ? *d : fail();
    }
    case SolverMethod::Iterative: {
      auto d = finalize(detail::solve_iterative(Q, k, guess), false);
      return d ? *d : fail();
    }
    case SolverMethod::SparseDirect: {
      auto d = finalize(detail::solve_sparse_direct(Q, k), false);
      return d ? *d : fail();
    }
    case SolverMethod::Auto: {
      if (n <= 5000) {
        auto d = finalize(detail::solve_dense(Q, k), true);
        if (d) return *d;
        auto d2 = finalize(detail::solve_sparse_direct(Q, k), false);
        return d2 ? *d2 : fail();
      }
      auto d = finalize(detail::solve_iterative(Q, k, guess), true);
      if (d) return *d;
      auto d2 = finalize(detail::solve_sparse_direct(Q, k), false);
      return d2 ? *d2 : fail();
    }
  }
  return fail();
}

// Solve on the largest closed class and embed zeros elsewhere. Used by the
// refinement driver when a filtered truncation turns out reducible.
inline Distribution solve_stationary_restricted(
    const SparseGenerator& Q, const std::vector<int>& closed_class,
    SolverMethod method = SolverMethod::Auto) {
  SparseGenerator sub = restrict_generator(Q, closed_class);
  Distribution inner = solve_stationary(sub, method);
  Distribution d;
  d.p.assign(Q.size(), 0.0);
  for (std::size_t i = 0; i < closed_class.size(); ++i)
    d.p[closed_class[i]] = inner.p[i];
  d.residual = inner.residual;
  return d;
}

}  // namespace steadytrunc
