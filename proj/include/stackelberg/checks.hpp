#pragma once

// Runnable invariant suite: finite-difference gradient certificates, the
// strong-convexity and anchor-Lipschitz inequalities of the surrogate, and the
// complementarity identity of the antidiagonal matrices.

#include <cstdint>
#include <string>
#include <vector>

#include "stackelberg/game.hpp"
#include "stackelberg/stacked.hpp"

namespace stackelberg {

struct CheckResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // the statistic compared against the threshold
  std::string detail;
};

// Largest relative error between H(y0, x) and central differences of the
// follower costs, and between grad J0 and central differences of J0, over
// `samples` random points of Y0 x X.
CheckResult check_pseudo_gradient(const AggregativeGame& game, int samples, std::uint64_t seed, double tol = 1e-6);
CheckResult check_leader_gradient(const AggregativeGame& game, int samples, std::uint64_t seed, double tol = 1e-6);

// 0.5 nu^T P nu = lambda^T mu for random nu.
CheckResult check_antidiagonal_identity(Index half, int samples, std::uint64_t seed);

// Random points of R(0), a subset of R(theta): v-GNE points at random leader
// decisions.
std::vector<OmegaPoint> sample_relaxed_points(const StackedSystem& sys, const RelaxationParams& params, int count,
                                              std::uint64_t seed);

// Surrogate cost at omega for anchor w_bar: strong convexity
//   J(w2) - J(w1) - grad J(w1)^T (w2 - w1) - sigma/2 ||w2 - w1||^2 >= -tol
// and the anchor-Lipschitz bound
//   (kappa0 + sigma) ||w_a - w_b|| - ||grad J(w; w_a) - grad J(w; w_b)|| >= -tol.
CheckResult check_strong_convexity(const StackedSystem& sys, const std::vector<OmegaPoint>& points, double sigma,
                                   int samples, std::uint64_t seed, double tol = 1e-9);
CheckResult check_anchor_lipschitz(const StackedSystem& sys, const std::vector<OmegaPoint>& points, double sigma,
                                   int samples, std::uint64_t seed, double tol = 1e-9);

}  // namespace stackelberg
