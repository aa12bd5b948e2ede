#pragma once

// Naive two-layer baseline: alternate a followers' v-GNE solve with a leader
// best response computed with the followers frozen, and average the leader
// decisions with weights beta(k).

#include <iosfwd>
#include <vector>

#include "stackelberg/game.hpp"
#include "stackelberg/vgne.hpp"

namespace stackelberg {

struct NaiveConfig {
  double beta_constant = 0.0;  // beta(k) = 1/k when zero, the constant otherwise
  double tol = 1e-4;           // on ||y0(k) - y0(k-1)||
  int max_iter = 500;
  VgneOptions vgne{1e-10, 200000, 1e-7, 1e-6, false};

  double beta(int k) const { return beta_constant > 0.0 ? beta_constant : 1.0 / static_cast<double>(k); }
  void validate() const;
};

struct NaiveTraceRow {
  int k = 0;
  double J0 = 0.0;  // at (y0(k-1), x(k))
  double y0_step_norm = 0.0;
  int vgne_iters = 0;
  double wall_ms = 0.0;
};

struct NaiveTrace {
  std::vector<NaiveTraceRow> rows;
  void write_csv(std::ostream& out, bool include_wall = true) const;
};

struct NaiveResult {
  Vec y0;
  Vec x;
  NaiveTrace trace;
  bool converged = false;
  int iterations = 0;
};

// argmin over Y0 of J0(., x_fixed). Closed form (bang-bang) when J0 is linear
// in y0 and Y0 is a box; accelerated projected gradient otherwise.
Vec leader_best_response(const AggregativeGame& game, const Vec& x_fixed);

// Starts from `y0_start` (the midpoint of Y0 when empty).
NaiveResult naive_run(const AggregativeGame& game, const NaiveConfig& cfg = {}, const Vec& y0_start = Vec());

}  // namespace stackelberg
