#include "stackelberg/sca.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace stackelberg {
namespace {

using Clock = std::chrono::steady_clock;

struct InnerOutcome {
  OmegaPoint omega;
  Vec eta;
  int iterations = 0;
};

InnerOutcome solve_inner(const ConvexSubproblem& sub, const ScaConfig& cfg, bool tight, const Vec& eta0) {
  if (cfg.inner == InnerSolver::reference) {
    ReferenceOptions opts = cfg.reference;
    if (tight) opts.tol *= 0.1;
    ReferenceResult r = reference_solve(sub, opts, eta0);
    return {std::move(r.omega), std::move(r.eta), r.iterations};
  }
  AdalConfig opts = cfg.adal;
  if (tight) {
    opts.tol *= 0.01;
    opts.block_tol *= 0.1;
  }
  AdalResult r = adal_run(sub, opts, eta0);
  return {std::move(r.omega), std::move(r.eta), r.total_iterations};
}

double leader_cost(const AggregativeGame& game, const OmegaPoint& w) {
  return game.leader_cost(Vec(w.y0()), Vec(w.x()));
}

}  // namespace

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "adal") return InnerSolver::adal;
  if (name == "reference") return InnerSolver::reference;
  throw PreconditionError("unknown inner solver '" + name + "' (expected adal or reference)");
}

std::string to_string(InnerSolver solver) { return solver == InnerSolver::adal ? "adal" : "reference"; }

double resolve_alpha(const AggregativeGame& game, const ScaConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw PreconditionError("sigma must be positive");
  const double kappa0 = leader_lipschitz(game);
  const double bound = kappa0 > 0.0 ? 2.0 * cfg.sigma / kappa0 : std::numeric_limits<double>::infinity();
  if (!cfg.alpha) return std::min(0.9, 0.9 * bound);
  const double a = *cfg.alpha;
  if (!(a > 0.0) || !(a <= 1.0) || !(a < bound)) {
    throw PreconditionError("step alpha = " + std::to_string(a) + " must lie in (0, min(1, 2 sigma / kappa0 = " +
                            std::to_string(bound) + "))");
  }
  return a;
}

double vanishing_step(int k) { return std::pow(static_cast<double>(k + 1), -0.6); }

OmegaPoint step(const OmegaPoint& w_k, const OmegaPoint& w_hat, double alpha) {
  if (w_k.data.size() != w_hat.data.size()) throw StructuralError("step: points differ in length");
  if (!(alpha > 0.0) || alpha > 1.0) throw PreconditionError("step size must lie in (0, 1]");
  return OmegaPoint(w_k.layout, (1.0 - alpha) * w_k.data + alpha * w_hat.data);
}

DescentReport check_descent(const AggregativeGame& game, double sigma, const OmegaPoint& w_bar,
                            const OmegaPoint& w_hat, double tol) {
  const Vec grad = game.leader_grad(Vec(w_bar.y0()), Vec(w_bar.x()));
  DescentReport r;
  r.lhs = (w_bar.phi() - w_hat.phi()).dot(grad);
  r.rhs = sigma * (w_bar.data - w_hat.data).squaredNorm();
  r.pass = r.lhs >= r.rhs - tol * (1.0 + std::abs(r.rhs));
  return r;
}

void SolveTrace::write_csv(std::ostream& out, bool include_wall) const {
  out << "k,J0,step_norm,inner_iters,eq_residual,compl_max,descent_lhs,descent_rhs";
  out << (include_wall ? ",wall_ms\n" : "\n");
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.k << ',' << r.J0 << ',' << r.step_norm << ',' << r.inner_iters << ',' << r.eq_residual << ','
        << r.compl_max << ',' << r.descent_lhs << ',' << r.descent_rhs;
    if (include_wall) out << ',' << r.wall_ms;
    out << '\n';
  }
  out.precision(old);
}

LicqReport check_licq(const StackedSystem& sys, const RelaxationParams& params, const OmegaPoint& w,
                      double rank_tol, double active_tol, Index max_dim) {
  LicqReport report;
  const auto& layout = *sys.layout();
  const Index s = layout.size();
  if (s > max_dim) {
    report.note = "skipped: dimension " + std::to_string(s) + " exceeds " + std::to_string(max_dim);
    return report;
  }
  std::vector<Vec> rows;
  const Mat A = sys.dense();
  for (Index r = 0; r < A.rows(); ++r) rows.emplace_back(A.row(r).transpose());

  const auto& leader = sys.game().leader();
  for (Index k = 0; k < layout.n0(); ++k) {
    const double y = w.y0()[k];
    if (y - leader.lo[k] <= active_tol || leader.hi[k] - y <= active_tol) {
      Vec e = Vec::Zero(s);
      e[k] = 1.0;
      rows.push_back(std::move(e));
    }
  }
  for (Index r = 0; r < leader.G0.rows(); ++r) {
    if (leader.h0[r] - leader.G0.row(r).dot(w.y0()) <= active_tol) {
      Vec e = Vec::Zero(s);
      e.head(layout.n0()) = leader.G0.row(r).transpose();
      rows.push_back(std::move(e));
    }
  }
  for (Index j = layout.phi_size(); j < s; ++j) {
    if (w.data[j] <= active_tol) {
      Vec e = Vec::Zero(s);
      e[j] = 1.0;
      rows.push_back(std::move(e));
    }
  }
  auto complementarity_row = [&](Index offset, Index half, double theta) {
    const auto lam = w.data.segment(offset, half);
    const auto mu = w.data.segment(offset + half, half);
    if (half == 0 || theta - lam.dot(mu) > active_tol * std::max(1.0, theta)) return;
    Vec e = Vec::Zero(s);
    e.segment(offset, half) = mu;
    e.segment(offset + half, half) = lam;
    rows.push_back(std::move(e));
  };
  for (Index i = 0; i < layout.N(); ++i) {
    complementarity_row(layout.nu_local_offset(i), layout.local_rows(i), params.theta_i[i]);
  }
  complementarity_row(layout.nu_offset(), layout.m(), params.theta);

  Mat G(static_cast<Index>(rows.size()), s);
  for (Index r = 0; r < G.rows(); ++r) G.row(r) = rows[static_cast<std::size_t>(r)].transpose();
  report.checked = true;
  report.active = G.rows();
  if (G.rows() == 0) return report;
  Eigen::JacobiSVD<Mat> svd(G);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
  for (Index k = 0; k < sv.size(); ++k) report.rank += sv[k] > cutoff ? 1 : 0;
  report.holds = report.rank == report.active;
  if (!report.holds) {
    report.note = "active gradients have rank " + std::to_string(report.rank) + " < " +
                  std::to_string(report.active);
  }
  return report;
}

ScaResult run(std::shared_ptr<const StackedSystem> sys, const RelaxationParams& params, const ScaConfig& cfg,
              const OmegaPoint& w0) {
  const auto& game = sys->game();
  params.validate(game.N());
  if (cfg.max_outer <= 0) throw PreconditionError("max_outer must be positive");
  ScaResult result;
  result.alpha = resolve_alpha(game, cfg);
  const auto report0 = residuals(*sys, params, w0);
  if (!report0.feasible(1e-7)) throw PreconditionError("initial point is not in R(theta)");

  OmegaPoint w = w0;
  std::optional<OmegaPoint> previous_hat;
  Vec eta;
  auto& trace = result.trace;
  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto start = Clock::now();
    if (cfg.keep_iterates) result.iterates.push_back(w.data);
    const ConvexSubproblem sub = convexify(sys, params, cfg.sigma, w);
    InnerOutcome inner;
    try {
      inner = solve_inner(sub, cfg, false, cfg.warm_start_dual ? eta : Vec());
    } catch (const IterationLimitError& e) {
      throw IterationLimitError("outer iteration " + std::to_string(k) + ": " + e.what(), e.last_residual());
    }
    DescentReport descent = check_descent(game, cfg.sigma, w, inner.omega, cfg.descent_tol);
    if (!descent.pass) {
      InnerOutcome tight = solve_inner(sub, cfg, true, inner.eta);
      inner.iterations += tight.iterations;
      inner.omega = std::move(tight.omega);
      descent = check_descent(game, cfg.sigma, w, inner.omega, cfg.descent_tol);
      if (!descent.pass) {
        trace.warnings.push_back("outer iteration " + std::to_string(k) + ": descent inequality violated (lhs " +
                                 std::to_string(descent.lhs) + ", rhs " + std::to_string(descent.rhs) + ")");
      }
    }
    const auto rep = residuals(*sys, params, w);
    TraceRow row;
    row.k = k;
    row.J0 = leader_cost(game, w);
    row.stationarity = (inner.omega.data - w.data).norm();
    row.step_norm = previous_hat ? (inner.omega.data - previous_hat->data).norm() : row.stationarity;
    row.inner_iters = inner.iterations;
    row.eq_residual = rep.equality;
    row.compl_max = std::max(rep.complementarity, rep.local_complementarity);
    row.descent_lhs = descent.lhs;
    row.descent_rhs = descent.rhs;

    const bool primary = previous_hat && row.step_norm <= cfg.outer_tol;
    const bool secondary = row.stationarity <= cfg.outer_tol;
    if (primary || secondary) {
      row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      trace.rows.push_back(row);
      if (cfg.on_iteration) cfg.on_iteration(row);
      result.converged = true;
      result.iterations = k + 1;
      result.stop_reason = primary ? "step" : "stationary";
      break;
    }
    const double a = cfg.vanishing ? vanishing_step(k) : result.alpha;
    OmegaPoint next = step(w, inner.omega, a);
    const double next_cost = leader_cost(game, next);
    if (next_cost > row.J0 + cfg.monotone_slack) {
      trace.warnings.push_back("outer iteration " + std::to_string(k) + ": J0 increased by " +
                               std::to_string(next_cost - row.J0));
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.rows.push_back(row);
    if (cfg.on_iteration) cfg.on_iteration(row);
    previous_hat = std::move(inner.omega);
    eta = std::move(inner.eta);
    w = std::move(next);
    result.iterations = k + 1;
  }
  if (!result.converged) {
    result.stop_reason = "max_outer";
    if (cfg.keep_iterates) result.iterates.push_back(w.data);
  }
  result.omega = std::move(w);
  if (cfg.check_licq) result.licq = check_licq(*sys, params, result.omega, 1e-8, 1e-8, cfg.licq_max_dim);
  return result;
}

}  // namespace stackelberg
