#pragma once

// Solvers for the convex surrogate: the three-block ADAL split (leader,
// followers, coordinator) and a centralized dual reference solver.

#include <iosfwd>
#include <vector>

#include "stackelberg/linalg.hpp"
#include "stackelberg/subproblem.hpp"

namespace stackelberg {

struct AdalConfig {
  double rho = 10.0;
  double tau = 0.3;  // must satisfy tau * r_max < 1
  int r_max = 3;
  double tol = 1e-8;  // primal residual and iterate change, infinity norm
  int max_inner = 3000;
  double block_tol = 1e-10;
  int max_rho_doublings = 3;
  // An attempt counts as stalled when its best residual has not improved by
  // 10% over this many iterations; the penalty is then doubled.
  int stall_window = 400;
  // Coupling rows A x + mu = b are multiplied by coupling_scale / max_j |A_rj|
  // before the split (0 disables). Rows whose follower coefficients are 1/N
  // otherwise carry a penalty N^2 times weaker than the stationarity rows.
  double coupling_scale = 1.0;

  void validate() const;
};

// eta and the z images refer to the row-scaled system diag(row_scale) A w = diag(row_scale) d.
struct AdalState {
  Vec eta;
  Vec z_leader;
  Vec z_followers;
  Vec z_coordinator;
  Vec y0;
  Vec y;
  Vec nu;
  int t = 0;
  Vec row_scale;  // all ones when no scaling is applied
  Vec d;          // scaled right-hand side
  double leader_norm_sq = 0.0;
  double followers_norm_sq = 0.0;
  double coordinator_norm_sq = 0.0;
};

struct InnerTraceRow {
  int t = 0;
  double primal_residual = 0.0;
  double dual_step_norm = 0.0;
  double block_solve_ms = 0.0;
};

struct InnerTrace {
  std::vector<InnerTraceRow> rows;
  void write_csv(std::ostream& out) const;
};

struct AdalResult {
  OmegaPoint omega;
  InnerTrace trace;
  Vec eta;
  int iterations = 0;  // of the final attempt
  int total_iterations = 0;
  double primal_residual = 0.0;
  double rho = 0.0;  // penalty of the final attempt
  int rho_doublings = 0;
  bool converged = false;
};

// Row scaling of A_omega used by adal_run for the given configuration.
Vec adal_row_scale(const StackedSystem& sys, const AdalConfig& cfg);

// z_j = A_j (anchor block j) and eta = eta0 (an unscaled multiplier; zero when
// empty). The block norms are estimated for the scaled operator.
AdalState adal_init(const ConvexSubproblem& sub, const Vec& row_scale = Vec(), const Vec& eta0 = Vec());

// argmin of the block augmented Lagrangians over their sets, by accelerated
// projected gradient started at `warm`.
Vec leader_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                      const linalg::ApgOptions& options = {});
Vec followers_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                         const linalg::ApgOptions& options = {});
Vec coordinator_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, const Vec& warm,
                           const linalg::ApgOptions& options = {});

// Follower i's share of the followers' block with every other follower held
// at its value in `y`. Returns col(x_i, nu_i). When the followers do not
// interact, solving these N problems reproduces followers_subproblem.
Vec follower_subproblem(const ConvexSubproblem& sub, const AdalState& state, double rho, Index i,
                        const Vec& y, const linalg::ApgOptions& options = {});

// eta0 warm-starts the multiplier (unscaled); every penalty retry restarts
// from it. Throws IterationLimitError when every retry exhausts max_inner or
// stalls. The returned eta is the multiplier of the unscaled rows.
AdalResult adal_run(const ConvexSubproblem& sub, const AdalConfig& cfg = {}, const Vec& eta0 = Vec());

struct ReferenceOptions {
  double tol = 1e-9;  // KKT residual certificate
  int max_iter = 50000;
  int memory = 20;
};

struct ReferenceResult {
  OmegaPoint omega;
  Vec eta;
  double kkt_residual = 0.0;
  double primal_residual = 0.0;
  double natural_residual = 0.0;
  int iterations = 0;
  int evaluations = 0;  // projections onto the set constraints
};

// ||A w - d||_inf + ||w - P(w - grad L(w, eta))||_inf for the surrogate.
double kkt_residual(const ConvexSubproblem& sub, const Vec& omega, const Vec& eta);

// The minimiser of the Lagrangian for a fixed multiplier,
// P(omega_bar - (c + A^T eta) / sigma).
Vec lagrangian_minimizer(const ConvexSubproblem& sub, const Vec& eta);

// Centralized solve: L-BFGS on the concave dual of the equality constraints,
// whose gradient A w(eta) - d needs one projection per evaluation. Throws
// Error when the KKT certificate is not reached.
ReferenceResult reference_solve(const ConvexSubproblem& sub, const ReferenceOptions& options = {},
                                const Vec& eta_start = Vec());

}  // namespace stackelberg
