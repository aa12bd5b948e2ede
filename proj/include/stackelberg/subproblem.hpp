#pragma once

// The strongly convex surrogate solved at every outer iteration:
//
//   min  c^T omega + sigma/2 ||omega - omega_bar||^2
//   s.t. A_omega omega = d,  y0 in Y0,  x_i in X_i,
//        nu_i in C~(theta_i; nu_bar_i),  nu in C~(theta; nu_bar),
//
// with c = col(grad J0(phi_bar), 0).

#include <memory>
#include <vector>

#include "stackelberg/projections.hpp"
#include "stackelberg/stacked.hpp"

namespace stackelberg {

struct ConvexSubproblem {
  std::shared_ptr<const StackedSystem> sys;
  OmegaPoint anchor;
  Vec c;
  double sigma = 1.0;
  RelaxationParams params;
  QuadSublevel coordinator_set;
  std::vector<QuadSublevel> follower_sets;

  const AggregativeGame& game() const { return sys->game(); }
  const OmegaLayout& layout() const { return *sys->layout(); }

  double cost(const Vec& omega) const;
  Vec cost_gradient(const Vec& omega) const;

  // Block projections; y = col(x, {nu_i}), a follower block is col(x_i, nu_i).
  Vec project_leader(const Vec& y0) const;
  Vec project_follower(Index i, const Vec& block) const;
  Vec project_followers(const Vec& y) const;
  Vec project_coordinator(const Vec& nu) const;
  Vec project(const Vec& omega) const;

  // Largest violation of the set constraints (not the equalities).
  double set_violation(const Vec& omega) const;
};

// Builds the surrogate around w_bar. Throws PreconditionError when w_bar is
// not in R(theta) to within `feasibility_tol`.
ConvexSubproblem convexify(std::shared_ptr<const StackedSystem> sys, const RelaxationParams& params,
                           double sigma, const OmegaPoint& w_bar, double feasibility_tol = 1e-7);

}  // namespace stackelberg
