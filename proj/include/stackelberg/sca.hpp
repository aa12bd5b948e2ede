#pragma once

// Two-layer sequential convex approximation: at every outer iteration the
// relaxed feasible set is convexified around the current iterate, the
// strongly convex surrogate is solved (ADAL or the centralized reference), and
// the iterate moves by a convex combination towards the surrogate optimum.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stackelberg/inner.hpp"
#include "stackelberg/subproblem.hpp"

namespace stackelberg {

enum class InnerSolver { adal, reference };

InnerSolver parse_inner_solver(const std::string& name);
std::string to_string(InnerSolver solver);

struct TraceRow {
  int k = 0;
  double J0 = 0.0;
  double step_norm = 0.0;       // ||w_hat^k - w_hat^{k-1}|| (||w_hat^0 - w^0|| at k = 0)
  double stationarity = 0.0;    // ||w_hat^k - w^k||
  int inner_iters = 0;
  double eq_residual = 0.0;     // of w^k
  double compl_max = 0.0;       // max(lambda^T mu, max_i lambda_i^T mu_i) of w^k
  double descent_lhs = 0.0;
  double descent_rhs = 0.0;
  double wall_ms = 0.0;
};

struct ScaConfig {
  double sigma = 1.0;
  std::optional<double> alpha;  // fixed step; defaults to min(0.9, 0.9 * 2 sigma / kappa0)
  bool vanishing = false;       // alpha_k = (k + 1)^-0.6 instead of a fixed step
  double outer_tol = 1e-4;
  int max_outer = 500;
  InnerSolver inner = InnerSolver::adal;
  AdalConfig adal;
  ReferenceOptions reference;
  double descent_tol = 1e-6;
  double monotone_slack = 1e-9;
  bool check_licq = true;
  Index licq_max_dim = 2000;
  bool keep_iterates = false;
  // Start every inner solve from the previous outer iteration's multiplier
  // instead of zero.
  bool warm_start_dual = true;
  // Called after every outer iteration with its trace row.
  std::function<void(const TraceRow&)> on_iteration;
};

// The fixed step actually used. Throws PreconditionError when a user step
// lies outside (0, min(1, 2 sigma / kappa0)).
double resolve_alpha(const AggregativeGame& game, const ScaConfig& cfg);

double vanishing_step(int k);

// (1 - alpha) w_k + alpha w_hat.
OmegaPoint step(const OmegaPoint& w_k, const OmegaPoint& w_hat, double alpha);

struct DescentReport {
  double lhs = 0.0;  // (phi_bar - phi_hat)^T grad J0(phi_bar)
  double rhs = 0.0;  // sigma ||w_bar - w_hat||^2
  bool pass = true;
};

DescentReport check_descent(const AggregativeGame& game, double sigma, const OmegaPoint& w_bar,
                            const OmegaPoint& w_hat, double tol = 1e-6);

struct SolveTrace {
  std::vector<TraceRow> rows;
  std::vector<std::string> warnings;
  void write_csv(std::ostream& out, bool include_wall = true) const;
};

struct LicqReport {
  bool checked = false;
  bool holds = true;
  Index active = 0;
  Index rank = 0;
  std::string note;
};

// Rank test of the active constraint gradients of R(theta) at w.
LicqReport check_licq(const StackedSystem& sys, const RelaxationParams& params, const OmegaPoint& w,
                      double rank_tol = 1e-8, double active_tol = 1e-8, Index max_dim = 2000);

struct ScaResult {
  OmegaPoint omega;
  SolveTrace trace;
  std::vector<Vec> iterates;  // w^0, w^1, ... when keep_iterates is set
  bool converged = false;
  int iterations = 0;
  std::string stop_reason;
  double alpha = 0.0;
  LicqReport licq;
};

ScaResult run(std::shared_ptr<const StackedSystem> sys, const RelaxationParams& params, const ScaConfig& cfg,
              const OmegaPoint& w0);

}  // namespace stackelberg
