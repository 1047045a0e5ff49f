#pragma once

// Relaxed diversity selection: minimize m' D m over the capped simplex
// {m : 0 <= m_i <= 1, sum m_i = k}, followed by top-k rounding with a
// certificate on the rounding loss.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "litho/error.hpp"

namespace litho::sampler {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Gram matrix of the columns: D(i, j) = x_i' x_j.
template <typename Derived>
MatrixX<typename Derived::Scalar> build_diversity(const Eigen::MatrixBase<Derived>& columns) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> d(columns.cols(), columns.cols());
  d.template triangularView<Eigen::Lower>() = columns.transpose() * columns;
  d.template triangularView<Eigen::StrictlyUpper>() = d.transpose();
  return d;
}

/// Gram matrix of a list of equally sized vectors.
template <typename Scalar>
MatrixX<Scalar> build_diversity(std::span<const VectorX<Scalar>> vectors) {
  if (vectors.empty()) return MatrixX<Scalar>(0, 0);
  const Eigen::Index len = vectors.front().size();
  MatrixX<Scalar> cols(len, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != len) {
      throw Error(ErrorKind::domain, "sampler", "build_diversity", "feature vectors differ in length",
                  {static_cast<long>(i)});
    }
    cols.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return build_diversity(cols);
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopping
/// after max_iters or once the Rayleigh quotient changes by less than rel_tol.
template <typename Derived>
typename Derived::Scalar largest_eigenvalue(const Eigen::MatrixBase<Derived>& d, int max_iters = 200,
                                            typename Derived::Scalar rel_tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = d.rows();
  if (n == 0) return Scalar(0);
  auto iterate = [&](VectorX<Scalar> v) {
    v.normalize();
    Scalar lambda = 0;
    VectorX<Scalar> w(n);
    for (int it = 0; it < max_iters; ++it) {
      w.noalias() = d * v;
      const Scalar next = v.dot(w);  // Rayleigh quotient of the unit iterate
      const Scalar norm = w.norm();
      if (norm == Scalar(0)) return Scalar(0);
      v = w / norm;
      const bool done = it > 0 && std::abs(next - lambda) <= rel_tol * std::max(std::abs(next), Scalar(1e-300));
      lambda = next;
      if (done) break;
    }
    return lambda;
  };
  // fixed start so results are reproducible
  VectorX<Scalar> start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = Scalar(1) + Scalar(i + 1) / Scalar(3 * n);
  Scalar lambda = iterate(start);
  // a start orthogonal to the top eigenvector stalls below the largest diagonal entry
  Eigen::Index j = 0;
  const Scalar diag = d.diagonal().maxCoeff(&j);
  if (lambda < diag) {
    start.setZero();
    start[j] = Scalar(1);
    lambda = std::max(diag, iterate(start));
  }
  return lambda;
}

/// Smallest eigenvalue estimate via power iteration on (shift * I - D).
template <typename Derived>
typename Derived::Scalar smallest_eigenvalue(const Eigen::MatrixBase<Derived>& d, typename Derived::Scalar shift,
                                             int max_iters = 200) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> flipped = -d;
  flipped.diagonal().array() += shift;
  return shift - largest_eigenvalue(flipped, max_iters, Scalar(1e-12));
}

/// Euclidean projection onto {m : 0 <= m_i <= 1, sum m_i = k}. The shift tau
/// in clip(v - tau, 0, 1) is bracketed by bisection and then solved exactly
/// on the identified active set.
template <typename Derived>
VectorX<typename Derived::Scalar> project_capped_simplex(const Eigen::MatrixBase<Derived>& v_in,
                                                         typename Derived::Scalar k) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> v = v_in;  // evaluate lazy expressions once
  const Eigen::Index n = v.size();
  if (!(k >= Scalar(0)) || k > Scalar(n) || !v.allFinite()) {
    throw Error(ErrorKind::domain, "sampler", "project_capped_simplex",
                "budget must lie in [0, n] and v must be finite");
  }
  auto clipped_sum = [&](Scalar tau) { return (v.array() - tau).max(Scalar(0)).min(Scalar(1)).sum(); };
  Scalar lo = v.minCoeff() - Scalar(1);  // sum == n
  Scalar hi = v.maxCoeff();              // sum == 0
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(hi)); ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (clipped_sum(mid) > k) lo = mid; else hi = mid;
  }
  Scalar tau = Scalar(0.5) * (lo + hi);

  // exact tau for the active set found by bisection
  Scalar free_sum = 0;
  Eigen::Index free_count = 0;
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar s = v[i] - tau;
    if (s >= Scalar(1)) ++ones;
    else if (s > Scalar(0)) { free_sum += v[i]; ++free_count; }
  }
  if (free_count > 0) {
    const Scalar exact = (free_sum + Scalar(ones) - k) / Scalar(free_count);
    if (std::abs(clipped_sum(exact) - k) <= std::abs(clipped_sum(tau) - k)) tau = exact;
  }
  return (v.array() - tau).max(Scalar(0)).min(Scalar(1)).matrix();
}

template <typename Scalar>
struct RelaxedSolution {
  VectorX<Scalar> m;
  Scalar objective = 0;
  Scalar lambda_max = 0;
  int iterations = 0;
  bool converged = false;
};

struct QpOptions {
  double tol = 1e-7;
  int max_iters = 5000;
  double psd_tol = 1e-7;
};

template <typename Derived, typename Vec>
typename Derived::Scalar quadratic_form(const Eigen::MatrixBase<Derived>& d, const Eigen::MatrixBase<Vec>& m) {
  return m.dot(d * m);
}

/// Projected gradient descent m <- P(m - eta * 2 D m), eta = 1 / (2 lambda_max),
/// from the uniform point (k/n) 1. Rejects matrices that are not symmetric PSD
/// and throws Error{internal} if the objective ever increases.
template <typename Derived>
RelaxedSolution<typename Derived::Scalar> solve_relaxed(const Eigen::MatrixBase<Derived>& d, Eigen::Index k,
                                                        const QpOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = d.rows();
  if (d.cols() != n || k < 0 || k > n) {
    throw Error(ErrorKind::domain, "sampler", "solve_relaxed", "need a square D and 0 <= k <= n");
  }
  RelaxedSolution<Scalar> sol;
  sol.m = VectorX<Scalar>::Constant(n, n == 0 ? Scalar(0) : Scalar(k) / Scalar(n));
  if (n == 0) {
    sol.converged = true;
    return sol;
  }
  const Scalar scale = std::max<Scalar>(Scalar(1), d.cwiseAbs().maxCoeff());
  if (!d.allFinite() || (d - d.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9) * scale) {
    throw Error(ErrorKind::domain, "sampler", "solve_relaxed", "diversity matrix is not symmetric");
  }
  sol.lambda_max = largest_eigenvalue(d);
  const Scalar lambda_min = smallest_eigenvalue(d, sol.lambda_max);
  if (lambda_min < -Scalar(opts.psd_tol) * scale) {
    throw Error(ErrorKind::domain, "sampler", "solve_relaxed",
                "diversity matrix is not positive semidefinite (lambda_min ~ " + std::to_string(double(lambda_min)) +
                    ")");
  }
  sol.objective = quadratic_form(d, sol.m);
  if (sol.lambda_max <= Scalar(0) || k == 0 || k == n) {
    sol.converged = true;
    return sol;
  }

  const Scalar eta = Scalar(1) / (Scalar(2) * sol.lambda_max);
  const Scalar slack = Scalar(1e-12) * scale * Scalar(k) * Scalar(k);
  VectorX<Scalar> next(n), dm = d * sol.m, dnext(n);
  for (int it = 1; it <= opts.max_iters; ++it) {
    next = project_capped_simplex(sol.m - eta * Scalar(2) * dm, Scalar(k));
    dnext.noalias() = d * next;
    const Scalar f = next.dot(dnext);
    if (f > sol.objective + slack) {
      throw Error(ErrorKind::internal, "sampler", "solve_relaxed",
                  "objective increased at iteration " + std::to_string(it));
    }
    const Scalar change = (next - sol.m).norm();
    sol.m.swap(next);
    dm.swap(dnext);
    sol.objective = f;
    sol.iterations = it;
    if (change < Scalar(opts.tol)) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

/// Rounding loss allowance 2 lambda (k - k^2 / n).
template <typename Scalar>
Scalar rounding_gap(Eigen::Index n, Eigen::Index k, Scalar lambda_max) {
  if (n == 0) return Scalar(0);
  return Scalar(2) * lambda_max * (Scalar(k) - Scalar(k) * Scalar(k) / Scalar(n));
}

template <typename Scalar>
struct Rounded {
  std::vector<Eigen::Index> indices;  // ascending
  Scalar objective_int = 0;           // f(m_b)
  Scalar relaxed_objective = 0;       // f(m)
  Scalar gap_bound = 0;               // 2 f(m) + 2 lambda (k - k^2/n)
  Scalar lambda_max = 0;
};

/// The k largest entries of m (ties to the lowest index) as a binary batch.
template <typename Vec>
std::vector<Eigen::Index> top_k(const Eigen::MatrixBase<Vec>& m, Eigen::Index k) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return m[a] > m[b]; });
  order.resize(static_cast<std::size_t>(std::min<Eigen::Index>(k, m.size())));
  std::sort(order.begin(), order.end());
  return order;
}

/// Rounds the relaxed solution and checks f(m) <= f(m_b) <= 2 f(m) + 2 lambda (k - k^2/n)
/// up to a relative tolerance; a violation throws Error{internal}. The left
/// inequality is only enforced when the solver reported convergence.
template <typename Derived, typename Scalar>
Rounded<Scalar> round_topk(const Eigen::MatrixBase<Derived>& d, const RelaxedSolution<Scalar>& sol, Eigen::Index k,
                           Scalar rel_tol = Scalar(1e-6)) {
  const Eigen::Index n = d.rows();
  Rounded<Scalar> out;
  out.indices = top_k(sol.m, k);
  VectorX<Scalar> mb = VectorX<Scalar>::Zero(n);
  for (const auto i : out.indices) mb[i] = Scalar(1);
  out.objective_int = quadratic_form(d, mb);
  out.relaxed_objective = quadratic_form(d, sol.m);
  out.lambda_max = sol.lambda_max > Scalar(0) ? sol.lambda_max : largest_eigenvalue(d);
  out.gap_bound = Scalar(2) * out.relaxed_objective + rounding_gap(n, k, out.lambda_max);
  const Scalar tol = rel_tol * std::max<Scalar>(Scalar(1), std::abs(out.gap_bound));
  // the lower side only holds for a converged relaxed minimizer
  const bool below = sol.converged && out.relaxed_objective > out.objective_int + tol;
  if (below || out.objective_int > out.gap_bound + tol) {
    throw Error(ErrorKind::internal, "sampler", "round_topk",
                "rounding certificate violated: f(m)=" + std::to_string(double(out.relaxed_objective)) +
                    " f(m_b)=" + std::to_string(double(out.objective_int)) +
                    " bound=" + std::to_string(double(out.gap_bound)));
  }
  return out;
}

/// Binary entropy -sum_c p_c ln p_c of a two-class posterior.
inline double entropy_uncertainty(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "sampler", "entropy_uncertainty", "p must lie in [0, 1]");
  auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

}  // namespace litho::sampler
