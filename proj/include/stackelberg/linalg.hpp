#pragma once

// Small matrix-free numerical kernels shared by the solvers.

#include <algorithm>
#include <cmath>
#include <functional>

#include "stackelberg/types.hpp"

namespace stackelberg::linalg {

// Largest eigenvalue of a symmetric PSD operator by power iteration.
// The start vector is fixed so results are reproducible.
template <class NormalOp>
double power_iteration(NormalOp&& apply, Index dim, int iterations = 100) {
  if (dim == 0) return 0.0;
  Vec v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = 1.0 + 0.1 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  v.normalize();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vec w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (k > 5 && std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

struct ApgOptions {
  double tol = 1e-10;  // on the infinity norm of the gradient mapping
  int max_iter = 200000;
};

struct ApgResult {
  Vec u;
  int iterations = 0;
  double gradient_mapping = 0.0;
  bool converged = false;
};

// Accelerated projected gradient for an L-smooth, mu-strongly convex objective
// over a closed convex set given by its projection. Uses constant momentum when
// mu > 0 and the FISTA schedule otherwise, with gradient-based restart.
template <class GradFn, class ProjFn>
ApgResult accelerated_projected_gradient(const Vec& start, double lipschitz, double strong_convexity,
                                         GradFn&& grad, ProjFn&& project,
                                         const ApgOptions& options = {}) {
  ApgResult result;
  const double L = std::max(lipschitz, 1e-300);
  Vec u = project(start);
  Vec u_prev = u;
  double t = 1.0;
  const double constant_beta =
      strong_convexity > 0.0
          ? (std::sqrt(L) - std::sqrt(strong_convexity)) / (std::sqrt(L) + std::sqrt(strong_convexity))
          : -1.0;
  for (int k = 0; k < options.max_iter; ++k) {
    double beta;
    if (constant_beta >= 0.0) {
      beta = constant_beta;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / t_next;
      t = t_next;
    }
    Vec y = u + beta * (u - u_prev);
    Vec u_next = project(y - grad(y) / L);
    const double mapping = L * (y - u_next).lpNorm<Eigen::Infinity>();
    result.iterations = k + 1;
    result.gradient_mapping = mapping;
    if (mapping <= options.tol) {
      result.u = std::move(u_next);
      result.converged = true;
      return result;
    }
    if ((y - u_next).dot(u_next - u) > 0.0) {
      u_prev = u_next;
      t = 1.0;
    } else {
      u_prev = u;
    }
    u = std::move(u_next);
  }
  result.u = std::move(u);
  return result;
}

struct NnlsResult {
  Vec z;
  double residual = 0.0;  // infinity norm of G z + h
  int iterations = 0;
};

// min 0.5 ||G z + h||^2 subject to z >= 0, matrix free. Columns are rescaled to
// unit norm internally; a zero column receives a zero multiplier.
NnlsResult nonnegative_least_squares(const std::function<Vec(const Vec&)>& apply,
                                     const std::function<Vec(const Vec&)>& apply_transpose,
                                     const Vec& column_norms, const Vec& h, double tol = 1e-15,
                                     int max_iter = 50000);

struct LbfgsOptions {
  double tol = 1e-9;  // on the infinity norm of the gradient
  int max_iter = 50000;
  int memory = 20;
  int max_line_search = 80;
};

struct LbfgsResult {
  Vec x;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Limited-memory BFGS for a smooth convex function given only its gradient.
// The line search brackets a root of the directional derivative, so progress
// does not depend on resolving tiny differences in function values.
LbfgsResult minimize_lbfgs(const std::function<Vec(const Vec&)>& grad, const Vec& start,
                           const LbfgsOptions& options = {});

// Conjugate gradients for a symmetric positive definite operator.
Vec conjugate_gradient(const std::function<Vec(const Vec&)>& apply, const Vec& rhs, double tol,
                       int max_iter);

}  // namespace stackelberg::linalg
