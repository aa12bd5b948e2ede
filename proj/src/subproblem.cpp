#include "stackelberg/subproblem.hpp"

#include <algorithm>

#include "stackelberg/vgne.hpp"

namespace stackelberg {
namespace {

Vec project_local(const LocalConstraints& local, const Vec& xi) {
  if (local.rows() == 0) return xi;
  if (local.is_box()) return xi.cwiseMax(local.box_lo()).cwiseMin(local.box_hi());
  return project(Polyhedron{local.F(), local.g()}, xi, {1e-13, 100000});
}

}  // namespace

double ConvexSubproblem::cost(const Vec& omega) const {
  return c.dot(omega) + 0.5 * sigma * (omega - anchor.data).squaredNorm();
}

Vec ConvexSubproblem::cost_gradient(const Vec& omega) const {
  return c + sigma * (omega - anchor.data);
}

Vec ConvexSubproblem::project_leader(const Vec& y0) const { return project_leader_set(game(), y0); }

Vec ConvexSubproblem::project_follower(Index i, const Vec& block) const {
  const auto& g = game();
  const Index ni = g.dim(i);
  Vec out(block.size());
  out.head(ni) = project_local(g.local(i), block.head(ni));
  const Index k = block.size() - ni;
  if (k > 0) out.tail(k) = stackelberg::project(follower_sets[static_cast<std::size_t>(i)], Vec(block.tail(k)));
  return out;
}

Vec ConvexSubproblem::project_followers(const Vec& y) const {
  const auto& g = game();
  const Index n = g.n();
  Vec out(y.size());
  for (Index i = 0; i < g.N(); ++i) {
    const Index ni = g.dim(i);
    out.segment(g.offset(i), ni) = project_local(g.local(i), y.segment(g.offset(i), ni));
    const Index k = 2 * g.local(i).rows();
    if (k == 0) continue;
    const Index off = n + 2 * g.local_offset(i);
    out.segment(off, k) = stackelberg::project(follower_sets[static_cast<std::size_t>(i)], Vec(y.segment(off, k)));
  }
  return out;
}

Vec ConvexSubproblem::project_coordinator(const Vec& nu) const {
  if (nu.size() == 0) return nu;
  return stackelberg::project(coordinator_set, nu);
}

Vec ConvexSubproblem::project(const Vec& omega) const {
  const auto& l = layout();
  Vec out(omega.size());
  out.head(l.n0()) = project_leader(omega.head(l.n0()));
  out.segment(l.y_offset(), l.y_size()) = project_followers(omega.segment(l.y_offset(), l.y_size()));
  out.tail(2 * l.m()) = project_coordinator(omega.tail(2 * l.m()));
  return out;
}

double ConvexSubproblem::set_violation(const Vec& omega) const {
  const auto& g = game();
  const auto& l = layout();
  OmegaPoint w(sys->layout(), omega);
  double worst = 0.0;
  const auto& leader = g.leader();
  if (l.n0() > 0) {
    worst = std::max({worst, (leader.lo - w.y0()).maxCoeff(), (w.y0() - leader.hi).maxCoeff()});
    if (leader.G0.rows() > 0) worst = std::max(worst, (leader.G0 * w.y0() - leader.h0).maxCoeff());
  }
  if (g.p() > 0) worst = std::max(worst, (g.local_apply(w.x()) - g.g()).maxCoeff());
  for (Index i = 0; i < g.N(); ++i) {
    if (g.local(i).rows() == 0) continue;
    worst = std::max(worst, violation(follower_sets[static_cast<std::size_t>(i)], Vec(w.nu_local(i))));
  }
  if (l.m() > 0) worst = std::max(worst, violation(coordinator_set, Vec(w.nu())));
  return worst;
}

ConvexSubproblem convexify(std::shared_ptr<const StackedSystem> sys, const RelaxationParams& params,
                           double sigma, const OmegaPoint& w_bar, double feasibility_tol) {
  if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
  const auto& game = sys->game();
  params.validate(game.N());
  const ResidualReport report = residuals(*sys, params, w_bar);
  if (!report.feasible(feasibility_tol)) {
    throw PreconditionError("anchor is not in R(theta): equality " + std::to_string(report.equality) +
                            ", bounds " + std::to_string(report.bound_violation) + ", complementarity " +
                            std::to_string(std::max(report.complementarity_excess,
                                                     report.local_complementarity_excess)) +
                            ", leader " + std::to_string(report.leader_violation));
  }
  ConvexSubproblem sub;
  sub.sys = sys;
  sub.anchor = w_bar;
  // Clean tiny negative round-off so the convexified sets are well defined.
  const Index phi = w_bar.layout->phi_size();
  sub.anchor.data.tail(w_bar.data.size() - phi) = sub.anchor.data.tail(w_bar.data.size() - phi).cwiseMax(0.0);
  sub.sigma = sigma;
  sub.params = params;
  sub.c = Vec::Zero(w_bar.data.size());
  sub.c.head(phi) = game.leader_grad(Vec(w_bar.y0()), Vec(w_bar.x()));
  sub.coordinator_set = QuadSublevel{Vec(sub.anchor.nu()), params.theta};
  for (Index i = 0; i < game.N(); ++i) {
    sub.follower_sets.push_back(QuadSublevel{Vec(sub.anchor.nu_local(i)), params.theta_i[i]});
  }
  return sub;
}

}  // namespace stackelberg
