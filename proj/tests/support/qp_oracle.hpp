#pragma once

// Brute-force QP oracle for tiny problems:
//   min 0.5 u^T H u + f^T u  s.t.  G u <= h,  E u = e,
// with H positive definite. Every subset of inequalities is tried as the
// active set; the first KKT point (primal feasible, multipliers >= 0) wins.
// Exponential in the number of inequalities, so keep it below ~14.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct QpSolution {
  Vec u;
  Vec ineq_multipliers;
  Vec eq_multipliers;
};

inline QpSolution solve_qp(const Mat& H, const Vec& f, const Mat& G, const Vec& h, const Mat& E = Mat(),
                           const Vec& e = Vec(), double tol = 1e-10) {
  const Eigen::Index n = H.rows();
  const Eigen::Index k = G.rows();
  const Eigen::Index q = E.rows();
  if (k > 20) throw std::invalid_argument("oracle::solve_qp: too many inequalities");
  std::optional<QpSolution> best;
  for (unsigned long mask = 0; mask < (1ul << k); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index r = 0; r < k; ++r)
      if (mask & (1ul << r)) active.push_back(r);
    const Eigen::Index a = static_cast<Eigen::Index>(active.size());
    Mat K = Mat::Zero(n + q + a, n + q + a);
    Vec rhs = Vec::Zero(n + q + a);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -f;
    if (q) {
      K.block(0, n, n, q) = E.transpose();
      K.block(n, 0, q, n) = E;
      rhs.segment(n, q) = e;
    }
    for (Eigen::Index j = 0; j < a; ++j) {
      K.block(0, n + q + j, n, 1) = G.row(active[j]).transpose();
      K.block(n + q + j, 0, 1, n) = G.row(active[j]);
      rhs[n + q + j] = h[active[j]];
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (lu.rank() < K.rows()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec u = sol.head(n);
    const Vec mult = sol.tail(a);
    if (k && ((G * u - h).array() > tol).any()) continue;
    if (a && (mult.array() < -tol).any()) continue;
    QpSolution s;
    s.u = u;
    s.eq_multipliers = sol.segment(n, q);
    s.ineq_multipliers = Vec::Zero(k);
    for (Eigen::Index j = 0; j < a; ++j) s.ineq_multipliers[active[j]] = mult[j];
    best = s;
    break;
  }
  if (!best) throw std::runtime_error("oracle::solve_qp: no KKT point found");
  return *best;
}

// Euclidean projection of v onto { G u <= h }.
inline Vec project_polyhedron(const Mat& G, const Vec& h, const Vec& v) {
  const Eigen::Index n = v.size();
  return solve_qp(Mat::Identity(n, n), -v, G, h).u;
}

}  // namespace oracle
