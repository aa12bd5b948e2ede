#include "stackelberg/vgne.hpp"

#include <algorithm>
#include <cmath>

#include "stackelberg/coupled_set.hpp"
#include "stackelberg/linalg.hpp"
#include "stackelberg/projections.hpp"

namespace stackelberg {
namespace {

// Active rows of the followers' constraints: coupling rows of A and stacked
// local rows of F, each selected by index.
struct ActiveRows {
  std::vector<Index> coupling;
  std::vector<Index> local;

  Index size() const { return static_cast<Index>(coupling.size() + local.size()); }

  // G_a v
  Vec rows_times(const AggregativeGame& game, const Vec& v) const {
    Vec out(size());
    Index k = 0;
    for (Index j : coupling) out[k++] = game.A().row(j).dot(v);
    if (!local.empty()) {
      const Vec fv = game.local_apply(v);
      for (Index r : local) out[k++] = fv[r];
    }
    return out;
  }

  // G_a^T z
  Vec transpose_times(const AggregativeGame& game, const Vec& z) const {
    Vec out = Vec::Zero(game.n());
    Index k = 0;
    if (!coupling.empty()) {
      Vec lam = Vec::Zero(game.m());
      for (Index j : coupling) lam[j] = z[k++];
      out.noalias() += game.A().transpose() * lam;
    }
    if (!local.empty()) {
      Vec lam = Vec::Zero(game.p());
      for (Index r : local) lam[r] = z[k++];
      out += game.local_apply_transpose(lam);
    }
    return out;
  }
};

Vec stacked_local_row_norms(const AggregativeGame& game) {
  Vec norms(game.p());
  for (Index i = 0; i < game.N(); ++i) {
    norms.segment(game.local_offset(i), game.local(i).rows()) = game.local(i).F().rowwise().norm();
  }
  return norms;
}

double q_norm(const AggregativeGame& game) {
  const auto& Q = game.Q();
  auto normal = [&](const Vec& v) { return Vec(Q.apply_transpose(Q.apply(v))); };
  return 1.05 * std::sqrt(std::max(0.0, linalg::power_iteration(normal, game.n(), 300)));
}

}  // namespace

Vec project_leader_set(const AggregativeGame& game, const Vec& y0) {
  const auto& leader = game.leader();
  Vec out = y0.cwiseMax(leader.lo).cwiseMin(leader.hi);
  if (leader.G0.rows() == 0) return out;
  std::vector<ConvexSetDescriptor> sets{Box{leader.lo, leader.hi}, Polyhedron{leader.G0, leader.h0}};
  return dykstra(sets, y0, {1e-12, 100000});
}

double vi_residual(const AggregativeGame& game, const Vec& y0, const Vec& x) {
  CoupledSet theta(game);
  const Vec H = game.pseudo_gradient(y0, x);
  return (x - theta.project(x - H)).norm();
}

VgneSolution solve_vgne(const AggregativeGame& game, const Vec& y0, const VgneOptions& options,
                        const Vec& warm) {
  if (game.monotone().has_value() && !*game.monotone()) {
    throw PreconditionError("pseudo-gradient is not monotone: Q + Q^T is indefinite");
  }
  if (y0.size() != game.n0()) throw StructuralError("y0 has the wrong length");
  CoupledSet theta(game);
  const auto& Q = game.Q();
  const Vec base = game.C() * y0 + game.h();
  const double norm = q_norm(game);
  const double gamma = norm > 0.0 ? 0.99 / norm : 1.0;
  const double scale = std::min(gamma, 1.0);

  Vec x = theta.project(warm.size() == game.n() ? warm : Vec::Zero(game.n()));
  VgneSolution sol;
  bool converged = false;
  double residual = 0.0;
  int k = 0;
  for (; k < options.max_iter; ++k) {
    const Vec Hx = Q.apply(x) + base;
    const Vec xt = theta.project(x - gamma * Hx);
    // ||x - P(x - H)|| <= ||x - P(x - gamma H)|| / min(gamma, 1)
    residual = (x - xt).norm() / scale;
    if (residual <= options.tol) {
      residual = (x - theta.project(x - Hx)).norm();
      if (residual <= options.tol) {
        converged = true;
        break;
      }
    }
    x = theta.project(x - gamma * (Q.apply(xt) + base));
  }
  if (!converged) throw IterationLimitError("v-GNE extragradient did not converge", residual);
  sol.iterations = k + 1;
  if (!options.recover) {
    sol.x = std::move(x);
    sol.vi_residual = residual;
    sol.lambda = Vec::Zero(game.m());
    for (Index i = 0; i < game.N(); ++i) sol.lambda_local.push_back(Vec::Zero(game.local(i).rows()));
    sol.kkt_residual = (game.pseudo_gradient(y0, sol.x)).lpNorm<Eigen::Infinity>();
    return sol;
  }
  VgneSolution full = recover_multipliers(game, y0, x, options);
  full.iterations = sol.iterations;
  return full;
}

VgneSolution recover_multipliers(const AggregativeGame& game, const Vec& y0, const Vec& x_in,
                                 const VgneOptions& options) {
  Vec x = x_in;
  ActiveRows active;
  {
    const Vec coupling_slack = game.b() - game.A() * x;
    for (Index j = 0; j < game.m(); ++j) {
      if (coupling_slack[j] <= options.active_tol) active.coupling.push_back(j);
    }
    const Vec local_slack = game.g() - game.local_apply(x);
    for (Index r = 0; r < game.p(); ++r) {
      if (local_slack[r] <= options.active_tol) active.local.push_back(r);
    }
  }
  Vec rhs(active.size());
  {
    Index k = 0;
    for (Index j : active.coupling) rhs[k++] = game.b()[j];
    for (Index r : active.local) rhs[k++] = game.g()[r];
  }

  // Minimum-norm correction onto the active faces, then exact snapping of
  // single-coordinate bounds.
  if (active.size() > 0) {
    const Vec gap = active.rows_times(game, x) - rhs;
    auto gram = [&](const Vec& w) { return active.rows_times(game, active.transpose_times(game, w)); };
    const Vec w = linalg::conjugate_gradient(gram, gap, 1e-15, 10 * static_cast<int>(active.size()) + 100);
    const Vec polished = x - active.transpose_times(game, w);
    const double before = gap.lpNorm<Eigen::Infinity>();
    const double after = (active.rows_times(game, polished) - rhs).lpNorm<Eigen::Infinity>();
    if (after < before) x = polished;
    for (Index r : active.local) {
      Index follower = 0;
      while (follower + 1 < game.N() && game.local_offset(follower + 1) <= r) ++follower;
      const auto& local = game.local(follower);
      if (!local.is_box()) continue;
      const Index row = r - game.local_offset(follower);
      Index col = -1;
      for (Index c = 0; c < local.cols(); ++c) {
        if (local.F()(row, c) != 0.0) col = c;
      }
      x[game.offset(follower) + col] = local.g()[row] / local.F()(row, col);
    }
  }

  const Vec H = game.pseudo_gradient(y0, x);
  Vec z = Vec::Zero(active.size());
  if (active.size() > 0) {
    Vec norms(active.size());
    const Vec local_norms = stacked_local_row_norms(game);
    Index k = 0;
    for (Index j : active.coupling) norms[k++] = game.A().row(j).norm();
    for (Index r : active.local) norms[k++] = local_norms[r];
    auto apply = [&](const Vec& v) { return active.transpose_times(game, v); };
    auto apply_t = [&](const Vec& r) { return active.rows_times(game, r); };
    z = linalg::nonnegative_least_squares(apply, apply_t, norms, H).z;

    // Exact least squares on the identified support.
    const double zmax = z.size() > 0 ? z.maxCoeff() : 0.0;
    ActiveRows support;
    std::vector<Index> where;
    for (Index j = 0; j < static_cast<Index>(active.coupling.size()); ++j) {
      if (z[j] > 1e-12 * std::max(1.0, zmax)) {
        support.coupling.push_back(active.coupling[static_cast<std::size_t>(j)]);
        where.push_back(j);
      }
    }
    const Index nc = static_cast<Index>(active.coupling.size());
    for (Index j = 0; j < static_cast<Index>(active.local.size()); ++j) {
      if (z[nc + j] > 1e-12 * std::max(1.0, zmax)) {
        support.local.push_back(active.local[static_cast<std::size_t>(j)]);
        where.push_back(nc + j);
      }
    }
    if (support.size() > 0) {
      Vec zs(support.size());
      for (Index k2 = 0; k2 < support.size(); ++k2) zs[k2] = z[where[static_cast<std::size_t>(k2)]];
      auto gram = [&](const Vec& w) { return support.rows_times(game, support.transpose_times(game, w)); };
      const Vec rs = -support.rows_times(game, H) - gram(zs);
      const Vec dz = linalg::conjugate_gradient(gram, rs, 1e-15, 10 * static_cast<int>(support.size()) + 100);
      const Vec refined = zs + dz;
      const double old_res = (H + support.transpose_times(game, zs)).lpNorm<Eigen::Infinity>();
      const double new_res = (H + support.transpose_times(game, refined)).lpNorm<Eigen::Infinity>();
      if (refined.minCoeff() >= 0.0 && new_res < old_res) {
        for (Index k2 = 0; k2 < support.size(); ++k2) z[where[static_cast<std::size_t>(k2)]] = refined[k2];
      }
    }
  }

  VgneSolution sol;
  sol.x = x;
  sol.lambda = Vec::Zero(game.m());
  Vec lam_local = Vec::Zero(game.p());
  {
    Index k = 0;
    for (Index j : active.coupling) sol.lambda[j] = z[k++];
    for (Index r : active.local) lam_local[r] = z[k++];
  }
  for (Index i = 0; i < game.N(); ++i) {
    sol.lambda_local.push_back(lam_local.segment(game.local_offset(i), game.local(i).rows()));
  }
  sol.kkt_residual = (H + active.transpose_times(game, z)).lpNorm<Eigen::Infinity>();
  sol.vi_residual = vi_residual(game, y0, x);
  if (sol.kkt_residual > options.multiplier_tol) {
    throw DegenerateMultiplierError(
        "stationarity residual " + std::to_string(sol.kkt_residual) + " after multiplier recovery",
        sol.kkt_residual);
  }
  return sol;
}

OmegaPoint omega_from_vgne(const StackedSystem& sys, const Vec& y0, const VgneSolution& sol) {
  const auto& game = sys.game();
  OmegaPoint w(sys.layout());
  w.y0() = y0;
  w.x() = sol.x;
  w.lambda() = sol.lambda;
  Vec mu = (game.b() - game.A() * sol.x).cwiseMax(0.0);
  for (Index j = 0; j < game.m(); ++j) {
    if (sol.lambda[j] > 0.0) mu[j] = 0.0;
  }
  w.mu() = mu;
  const Vec local_slack = (game.g() - game.local_apply(sol.x)).cwiseMax(0.0);
  for (Index i = 0; i < game.N(); ++i) {
    const Vec& lam = sol.lambda_local[static_cast<std::size_t>(i)];
    Vec mui = local_slack.segment(game.local_offset(i), game.local(i).rows());
    for (Index r = 0; r < mui.size(); ++r) {
      if (lam[r] > 0.0) mui[r] = 0.0;
    }
    w.lambda_local(i) = lam;
    w.mu_local(i) = mui;
  }
  return w;
}

OmegaPoint feasible_init(const StackedSystem& sys, const RelaxationParams& params, const Vec& y0_seed,
                         const VgneOptions& options) {
  params.validate(sys.game().N());
  const Vec y0 = project_leader_set(sys.game(), y0_seed);
  VgneOptions opts = options;
  opts.recover = true;
  const VgneSolution sol = solve_vgne(sys.game(), y0, opts);
  return omega_from_vgne(sys, y0, sol);
}

}  // namespace stackelberg
