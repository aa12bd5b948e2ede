#include "stackelberg/baseline.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <ostream>

#include "stackelberg/linalg.hpp"

namespace stackelberg {

void NaiveConfig::validate() const {
  if (beta_constant < 0.0 || beta_constant > 1.0) throw PreconditionError("beta must lie in [0, 1]");
  if (!(tol > 0.0) || max_iter <= 0) throw PreconditionError("naive tolerance and iteration cap must be positive");
}

void NaiveTrace::write_csv(std::ostream& out, bool include_wall) const {
  out << "k,J0,y0_step_norm,vgne_iters" << (include_wall ? ",wall_ms\n" : "\n");
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.k << ',' << r.J0 << ',' << r.y0_step_norm << ',' << r.vgne_iters;
    if (include_wall) out << ',' << r.wall_ms;
    out << '\n';
  }
  out.precision(old);
}

Vec leader_best_response(const AggregativeGame& game, const Vec& x_fixed) {
  const auto& leader = game.leader();
  const Index n0 = game.n0();
  if (n0 == 0) return Vec();
  auto grad_y0 = [&](const Vec& y0) { return Vec(game.leader_grad(y0, x_fixed).head(n0)); };

  if (game.has_quadratic_leader()) {
    const Mat R = 0.5 * (leader.R0 + leader.R0.transpose());
    if (R.isZero(0.0) && leader.G0.rows() == 0) {
      const Vec g = grad_y0(Vec::Zero(n0));
      Vec y0(n0);
      for (Index k = 0; k < n0; ++k) {
        y0[k] = g[k] < 0.0 ? leader.hi[k] : leader.lo[k];
        if (!std::isfinite(y0[k])) throw PreconditionError("leader objective is unbounded below on Y0");
      }
      return y0;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(R, Eigen::EigenvaluesOnly);
    const double L = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
    const double mu = std::max(eig.eigenvalues().minCoeff(), 0.0);
    auto result = linalg::accelerated_projected_gradient(
        game.y0_midpoint(), L, mu, grad_y0, [&](const Vec& u) { return project_leader_set(game, u); },
        {1e-10, 1000000});
    if (!result.converged) throw IterationLimitError("leader best response did not converge", result.gradient_mapping);
    return result.u;
  }
  const double L = std::max(leader.custom->kappa0, 1e-12);
  auto result = linalg::accelerated_projected_gradient(
      game.y0_midpoint(), L, 0.0, grad_y0, [&](const Vec& u) { return project_leader_set(game, u); },
      {1e-10, 1000000});
  if (!result.converged) throw IterationLimitError("leader best response did not converge", result.gradient_mapping);
  return result.u;
}

NaiveResult naive_run(const AggregativeGame& game, const NaiveConfig& cfg, const Vec& y0_start) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  NaiveResult result;
  Vec y0 = project_leader_set(game, y0_start.size() == game.n0() ? y0_start : game.y0_midpoint());
  Vec x;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const auto start = Clock::now();
    VgneSolution sol = solve_vgne(game, y0, cfg.vgne, x);
    x = std::move(sol.x);
    const Vec best = leader_best_response(game, x);
    const double beta = cfg.beta(k);
    const Vec next = (1.0 - beta) * y0 + beta * best;
    NaiveTraceRow row;
    row.k = k;
    row.J0 = game.leader_cost(y0, x);
    row.y0_step_norm = (next - y0).norm();
    row.vgne_iters = sol.iterations;
    y0 = next;
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    result.trace.rows.push_back(row);
    result.iterations = k;
    if (row.y0_step_norm <= cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.y0 = std::move(y0);
  result.x = std::move(x);
  return result;
}

}  // namespace stackelberg
