#pragma once

// Variational GNE of the followers' game for a fixed leader decision, KKT
// multiplier recovery, and feasible starting points for the outer loop.

#include <vector>

#include "stackelberg/game.hpp"
#include "stackelberg/stacked.hpp"

namespace stackelberg {

struct VgneOptions {
  double tol = 1e-10;  // natural residual ||x - P(x - H)||
  int max_iter = 200000;
  double active_tol = 1e-7;
  double multiplier_tol = 1e-6;
  bool recover = true;  // also compute multipliers
};

struct VgneSolution {
  Vec x;
  Vec lambda;                     // coupling multipliers, length m
  std::vector<Vec> lambda_local;  // one p_i-vector per follower
  double kkt_residual = 0.0;      // ||Q x + C y0 + h + A^T lambda + F^T lambda_loc||_inf
  double vi_residual = 0.0;
  int iterations = 0;
};

// Extragradient on VI(Theta, H(y0, .)). `warm` may be empty.
VgneSolution solve_vgne(const AggregativeGame& game, const Vec& y0, const VgneOptions& options = {},
                        const Vec& warm = Vec());

// ||x - P_Theta(x - H(y0, x))||_2.
double vi_residual(const AggregativeGame& game, const Vec& y0, const Vec& x);

// Snaps x onto the faces it nearly touches and solves for nonnegative
// multipliers supported on them. Throws DegenerateMultiplierError when the
// stationarity residual stays above options.multiplier_tol.
VgneSolution recover_multipliers(const AggregativeGame& game, const Vec& y0, const Vec& x,
                                 const VgneOptions& options = {});

// Y0 membership by projection (box clamp, Dykstra when G0 is present).
Vec project_leader_set(const AggregativeGame& game, const Vec& y0);

// omega^0 from the v-GNE at y0_seed (projected onto Y0), with slacks
// mu = b - A x and mu_i = g_i - F_i x_i. Complementarity holds exactly.
OmegaPoint feasible_init(const StackedSystem& sys, const RelaxationParams& params, const Vec& y0_seed,
                         const VgneOptions& options = {});

// Assembles omega from a v-GNE tuple.
OmegaPoint omega_from_vgne(const StackedSystem& sys, const Vec& y0, const VgneSolution& sol);

}  // namespace stackelberg
