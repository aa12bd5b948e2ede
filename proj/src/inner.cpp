#include "stackelberg/inner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace stackelberg {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// min_u c^T u + sigma/2 ||u - u_bar||^2 + eta^T B u + rho/2 ||B u + r||^2 over a set.
template <class Apply, class ApplyT, class Project>
Vec solve_block(const Vec& c, const Vec& u_bar, double sigma, const Vec& eta, double rho, const Vec& r,
                double norm_sq, Apply&& apply, ApplyT&& apply_t, Project&& project, const Vec& warm,
                const linalg::ApgOptions& options) {
  if (u_bar.size() == 0) return u_bar;
  auto grad = [&](const Vec& u) { return Vec(c + sigma * (u - u_bar) + apply_t(Vec(eta + rho * (apply(u) + r)))); };
  const double L = sigma + rho * norm_sq;
  auto result = linalg::accelerated_projected_gradient(warm, L, sigma, grad, project, options);
  if (!result.converged) {
    throw IterationLimitError("block subproblem did not reach its gradient-mapping tolerance",
                              result.gradient_mapping);
  }
  return result.u;
}

Vec follower_block(const AggregativeGame& game, const Vec& y, Index i) {
  const Index ni = game.dim(i);
  const Index ki = 2 * game.local(i).rows();
  Vec out(ni + ki);
  out.head(ni) = y.segment(game.offset(i), ni);
  out.tail(ki) = y.segment(game.n() + 2 * game.local_offset(i), ki);
  return out;
}

void set_follower_block(const AggregativeGame& game, Vec& y, Index i, const Vec& block) {
  const Index ni = game.dim(i);
  const Index ki = 2 * game.local(i).rows();
  y.segment(game.offset(i), ni) = block.head(ni);
  y.segment(game.n() + 2 * game.local_offset(i), ki) = block.tail(ki);
}

}  // namespace

void AdalConfig::validate() const {
  if (!(rho > 0.0)) throw PreconditionError("ADAL penalty rho must be positive");
  if (!(tau > 0.0) || !(tau * r_max < 1.0)) throw PreconditionError("ADAL step tau must lie in (0, 1/r_max)");
  if (!(tol > 0.0) || max_inner <= 0) throw PreconditionError("ADAL tolerance and iteration cap must be positive");
  if (!(block_tol > 0.0) || max_rho_doublings < 0 || stall_window <= 0 || !(coupling_scale >= 0.0)) {
    throw PreconditionError("invalid ADAL block tolerance, retry count, stall window or coupling scale");
  }
}

void InnerTrace::write_csv(std::ostream& out) const {
  out << "t,primal_residual,dual_step_norm,block_solve_ms\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.primal_residual << ',' << r.dual_step_norm << ',' << r.block_solve_ms << '\n';
  }
}

Vec adal_row_scale(const StackedSystem& sys, const AdalConfig& cfg) {
  const auto& game = sys.game();
  Vec scale = Vec::Ones(sys.rows());
  if (cfg.coupling_scale <= 0.0) return scale;
  for (Index r = 0; r < game.m(); ++r) {
    const double largest = game.A().row(r).cwiseAbs().maxCoeff();
    if (largest > 0.0) scale[game.n() + r] = cfg.coupling_scale / largest;
  }
  return scale;
}

AdalState adal_init(const ConvexSubproblem& sub, const Vec& row_scale, const Vec& eta0) {
  const auto& sys = *sub.sys;
  const auto& w = sub.anchor;
  AdalState s;
  s.row_scale = row_scale.size() == sys.rows() ? row_scale : Vec::Ones(sys.rows());
  s.d = s.row_scale.cwiseProduct(sys.d());
  s.eta = eta0.size() == sys.rows() ? Vec(eta0.cwiseQuotient(s.row_scale)) : Vec::Zero(sys.rows());
  s.y0 = w.y0();
  s.y = w.y();
  s.nu = w.nu();
  s.z_leader = s.row_scale.cwiseProduct(sys.leader_apply(s.y0));
  s.z_followers = s.row_scale.cwiseProduct(sys.followers_apply(s.y));
  s.z_coordinator = s.row_scale.cwiseProduct(sys.coordinator_apply(s.nu));
  if ((s.row_scale.array() == 1.0).all()) {
    s.leader_norm_sq = sys.leader_norm_sq();
    s.followers_norm_sq = sys.followers_norm_sq();
    s.coordinator_norm_sq = sys.coordinator_norm_sq();
  } else {
    const Vec sq = s.row_scale.cwiseAbs2();
    auto estimate = [&](auto apply, auto apply_t, Index dim) {
      return 1.05 * linalg::power_iteration([&](const Vec& v) { return Vec(apply_t(Vec(sq.cwiseProduct(apply(v))))); },
                                            dim, 300);
    };
    const auto& l = sub.layout();
    s.leader_norm_sq = estimate([&](const Vec& v) { return sys.leader_apply(v); },
                                [&](const Vec& v) { return sys.leader_apply_transpose(v); }, l.n0());
    s.followers_norm_sq = estimate([&](const Vec& v) { return sys.followers_apply(v); },
                                   [&](const Vec& v) { return sys.followers_apply_transpose(v); }, l.y_size());
    s.coordinator_norm_sq = estimate([&](const Vec& v) { return sys.coordinator_apply(v); },
                                     [&](const Vec& v) { return sys.coordinator_apply_transpose(v); }, 2 * l.m());
  }
  return s;
}

Vec leader_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                      const linalg::ApgOptions& options) {
  const auto& sys = *sub.sys;
  const auto& l = sub.layout();
  const Vec& D = state.row_scale;
  const Vec r = state.z_followers + state.z_coordinator - state.d;
  return solve_block(
      Vec(sub.c.head(l.n0())), Vec(sub.anchor.y0()), sub.sigma, state.eta, rho, r, state.leader_norm_sq,
      [&](const Vec& u) { return Vec(D.cwiseProduct(sys.leader_apply(u))); },
      [&](const Vec& v) { return sys.leader_apply_transpose(D.cwiseProduct(v)); },
      [&](const Vec& u) { return sub.project_leader(u); }, warm, options);
}

Vec followers_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                         const linalg::ApgOptions& options) {
  const auto& sys = *sub.sys;
  const auto& l = sub.layout();
  const Vec& D = state.row_scale;
  const Vec r = state.z_leader + state.z_coordinator - state.d;
  return solve_block(
      Vec(sub.c.segment(l.y_offset(), l.y_size())), Vec(sub.anchor.y()), sub.sigma, state.eta, rho, r,
      state.followers_norm_sq, [&](const Vec& u) { return Vec(D.cwiseProduct(sys.followers_apply(u))); },
      [&](const Vec& v) { return sys.followers_apply_transpose(D.cwiseProduct(v)); },
      [&](const Vec& u) { return sub.project_followers(u); }, warm, options);
}

Vec coordinator_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                           const linalg::ApgOptions& options) {
  const auto& sys = *sub.sys;
  const auto& l = sub.layout();
  const Vec& D = state.row_scale;
  const Vec r = state.z_leader + state.z_followers - state.d;
  return solve_block(
      Vec(sub.c.tail(2 * l.m())), Vec(sub.anchor.nu()), sub.sigma, state.eta, rho, r, state.coordinator_norm_sq,
      [&](const Vec& u) { return Vec(D.cwiseProduct(sys.coordinator_apply(u))); },
      [&](const Vec& v) { return sys.coordinator_apply_transpose(D.cwiseProduct(v)); },
      [&](const Vec& u) { return sub.project_coordinator(u); }, warm, options);
}

Vec follower_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, Index i, const Vec& y,
                        const linalg::ApgOptions& options) {
  const auto& sys = *sub.sys;
  const auto& game = sub.game();
  const auto& l = sub.layout();
  const Vec& D = state.row_scale;
  Vec others = y;
  set_follower_block(game, others, i, Vec::Zero(follower_block(game, y, i).size()));
  const Vec r = state.z_leader + state.z_coordinator + D.cwiseProduct(sys.followers_apply(others)) - state.d;
  const Vec c_y = sub.c.segment(l.y_offset(), l.y_size());
  const Vec anchor_y = sub.anchor.y();
  const Index ni = game.dim(i);
  auto apply = [&](const Vec& u) {
    return Vec(D.cwiseProduct(sys.follower_apply(i, u.head(ni), u.tail(u.size() - ni))));
  };
  auto apply_t = [&](const Vec& v) {
    return follower_block(game, sys.followers_apply_transpose(D.cwiseProduct(v)), i);
  };
  return solve_block(follower_block(game, c_y, i), follower_block(game, anchor_y, i), sub.sigma, state.eta, rho, r,
                     state.followers_norm_sq, apply, apply_t,
                     [&](const Vec& u) { return sub.project_follower(i, u); }, follower_block(game, y, i), options);
}

AdalResult adal_run(const ConvexSubproblem& sub, const AdalConfig& cfg, const Vec& eta0) {
  cfg.validate();
  const auto& sys = *sub.sys;
  const linalg::ApgOptions block_options{cfg.block_tol, 200000};
  const AdalState initial = adal_init(sub, adal_row_scale(sys, cfg), eta0);
  const Vec& D = initial.row_scale;
  AdalResult result;
  double rho = cfg.rho;
  for (int attempt = 0; attempt <= cfg.max_rho_doublings; ++attempt, rho *= 2.0) {
    AdalState s = initial;
    Vec hat_y0 = s.y0, hat_y = s.y, hat_nu = s.nu;
    InnerTrace trace;
    bool converged = false;
    double best = std::numeric_limits<double>::infinity();
    int best_at = 0;
    for (s.t = 0; s.t < cfg.max_inner; ++s.t) {
      const auto start = Clock::now();
      hat_y0 = leader_subproblem(sub, s, rho, hat_y0, block_options);
      hat_y = followers_subproblem(sub, s, rho, hat_y, block_options);
      hat_nu = coordinator_subproblem(sub, s, rho, hat_nu, block_options);
      const double block_ms = elapsed_ms(start);

      const double change = cfg.tau * std::max({(hat_y0 - s.y0).lpNorm<Eigen::Infinity>(),
                                                (hat_y - s.y).lpNorm<Eigen::Infinity>(),
                                                (hat_nu - s.nu).lpNorm<Eigen::Infinity>(), 0.0});
      s.y0 += cfg.tau * (hat_y0 - s.y0);
      s.y += cfg.tau * (hat_y - s.y);
      s.nu += cfg.tau * (hat_nu - s.nu);
      s.z_leader += cfg.tau * (D.cwiseProduct(sys.leader_apply(hat_y0)) - s.z_leader);
      s.z_followers += cfg.tau * (D.cwiseProduct(sys.followers_apply(hat_y)) - s.z_followers);
      s.z_coordinator += cfg.tau * (D.cwiseProduct(sys.coordinator_apply(hat_nu)) - s.z_coordinator);
      const Vec primal = s.z_leader + s.z_followers + s.z_coordinator - s.d;
      const Vec dual_step = rho * cfg.tau * primal;
      s.eta += dual_step;
      // Reported on the unscaled rows.
      const double residual = primal.size() ? primal.cwiseQuotient(D).lpNorm<Eigen::Infinity>() : 0.0;
      trace.rows.push_back({s.t + 1, residual, dual_step.cwiseProduct(D).norm(), block_ms});
      if (residual <= cfg.tol && change <= cfg.tol) {
        converged = true;
        ++s.t;
        break;
      }
      if (residual < 0.9 * best) {
        best = residual;
        best_at = s.t;
      } else if (s.t - best_at >= cfg.stall_window) {
        break;
      }
    }
    result.total_iterations += static_cast<int>(trace.rows.size());
    result.rho = rho;
    result.rho_doublings = attempt;
    result.iterations = static_cast<int>(trace.rows.size());
    result.trace = std::move(trace);
    result.eta = D.cwiseProduct(s.eta);
    Vec omega(sys.size());
    omega << s.y0, s.y, s.nu;
    result.omega = OmegaPoint(sys.layout(), std::move(omega));
    result.primal_residual = sys.rows() ? sys.residual(result.omega).lpNorm<Eigen::Infinity>() : 0.0;
    if (converged) {
      result.converged = true;
      return result;
    }
  }
  throw IterationLimitError("ADAL did not converge after penalty doubling", result.primal_residual);
}

double kkt_residual(const ConvexSubproblem& sub, const Vec& omega, const Vec& eta) {
  const auto& sys = *sub.sys;
  const double primal = sys.rows() ? (sys.apply(omega) - sys.d()).lpNorm<Eigen::Infinity>() : 0.0;
  const Vec grad = sub.cost_gradient(omega) + sys.apply_transpose(eta);
  const double natural = (omega - sub.project(omega - grad)).lpNorm<Eigen::Infinity>();
  return primal + natural;
}

Vec lagrangian_minimizer(const ConvexSubproblem& sub, const Vec& eta) {
  const auto& sys = *sub.sys;
  return sub.project(Vec(sub.anchor.data - (sub.c + sys.apply_transpose(eta)) / sub.sigma));
}

ReferenceResult reference_solve(const ConvexSubproblem& sub, const ReferenceOptions& options, const Vec& eta_start) {
  const auto& sys = *sub.sys;
  ReferenceResult result;
  Vec eta = eta_start.size() == sys.rows() ? eta_start : Vec::Zero(sys.rows());
  // Gradient of the negated dual; the primal residual shrinks by the same amount.
  auto grad = [&](const Vec& e) { return Vec(sys.d() - sys.apply(lagrangian_minimizer(sub, e))); };
  const auto lbfgs = linalg::minimize_lbfgs(grad, eta, {0.5 * options.tol, options.max_iter, options.memory});
  eta = lbfgs.x;
  const Vec w = lagrangian_minimizer(sub, eta);
  result.iterations = lbfgs.iterations;
  result.evaluations = lbfgs.evaluations + 1;
  result.primal_residual = sys.rows() ? (sys.apply(w) - sys.d()).lpNorm<Eigen::Infinity>() : 0.0;
  const Vec g = sub.cost_gradient(w) + sys.apply_transpose(eta);
  result.natural_residual = (w - sub.project(w - g)).lpNorm<Eigen::Infinity>();
  result.kkt_residual = result.primal_residual + result.natural_residual;
  if (!(result.kkt_residual <= options.tol)) {
    throw Error("reference solve could not certify the KKT residual: " + std::to_string(result.kkt_residual));
  }
  result.omega = OmegaPoint(sys.layout(), w);
  result.eta = std::move(eta);
  return result;
}

}  // namespace stackelberg
