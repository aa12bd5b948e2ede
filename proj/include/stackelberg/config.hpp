#pragma once

// Run configuration read from JSON. Every key is optional; unknown keys are
// rejected so that typos do not silently fall back to defaults.
//
//   { "sca":        { "sigma", "alpha" (number or "vanishing"), "outer_tol", "max_outer",
//                     "inner" ("adal" | "reference"), "descent_tol", "monotone_slack",
//                     "check_licq", "licq_max_dim", "warm_start_dual" },
//     "adal":       { "rho", "tau", "tol", "max_inner", "block_tol", "max_rho_doublings",
//                     "coupling_scale" },
//     "reference":  { "tol", "max_iter", "memory" },
//     "naive":      { "beta" (number or "1/k"), "tol", "max_iter" },
//     "relaxation": { "theta", "theta_i" (number or array) },
//     "pev":        { "N", "T", "q", "c", "kappa_mean", "kappa_sd", "s_lo", "s_hi", "delta",
//                     "D", "capacity", "x_lo", "x_hi", "p_bar" },
//     "io":         { "game", "trace", "output" },
//     "seed": 1, "threads": 0 }

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "stackelberg/baseline.hpp"
#include "stackelberg/pev.hpp"
#include "stackelberg/sca.hpp"

namespace stackelberg {

struct IoPaths {
  std::string game;
  std::string trace;
  std::string output;
};

struct RunConfig {
  ScaConfig sca;
  NaiveConfig naive;
  double theta = 1e-2;
  std::optional<Vec> theta_i;  // per follower; theta for every follower when absent
  PevParams pev;
  IoPaths io;
  std::size_t threads = 0;  // 0 defers to SOLVER_THREADS / hardware concurrency

  RelaxationParams relaxation(Index followers) const;
};

// Throws PreconditionError on unknown keys or ill-typed values.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace stackelberg
