#pragma once

// Plug-in electric vehicle charging coordination.
//
// N vehicles choose charging profiles x_i in [x_lo, x_hi]^T with cost
//
//   J_i = (q + s_i) ||x_i||^2 + (c 1 - kappa_i - p)^T x_i + delta ||x_i - sigma(x)||^2,
//
// sigma(x) = (1/N) sum_j x_j, under the shared capacity sigma(x) <= C. The
// operator prices energy with p in [0, p_bar]^T and minimises
// J_0 = -p^T (D + sigma(x)).

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "stackelberg/baseline.hpp"
#include "stackelberg/game.hpp"
#include "stackelberg/sca.hpp"

namespace stackelberg {

struct PevParams {
  Index N = 100;
  Index T = 24;
  double q = 1.2e-3;
  double c = 0.11;
  double kappa_mean = 12.0;
  double kappa_sd = 2.0;
  double s_lo = 0.02;
  double s_hi = 0.1;
  double delta = 1.0;
  Vec D;         // non-PEV demand, length T; default profile when empty
  Vec capacity;  // length T; 1.5 from 23:00 to 08:00 and 0.5 otherwise when empty
  double x_lo = 0.0;
  double x_hi = 1.0;
  double p_bar = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  Vec demand() const;
  Vec capacity_profile() const;
};

Vec default_demand_profile(Index T);
Vec default_capacity_profile(Index T);

// Per-vehicle random data drawn from the seed.
struct PevDraw {
  std::vector<Vec> kappa;  // T-vectors
  Vec s;                   // one per vehicle
};
PevDraw draw_pev(const PevParams& params);

AggregativeGame generate_instance(const PevParams& params);

// The vehicle cost evaluated from its defining formula (not the canonical form).
double pev_follower_cost(const PevParams& params, const PevDraw& draw, Index i, const Vec& p, const Vec& x);

struct SweepPoint {
  double theta = 0.0;
  double J0_star = 0.0;
  double dJ_star_max = 0.0;
  int outer_iters = 0;
  std::string status;
  Vec follower_costs;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::vector<double> grid;

  void write_csv(std::ostream& out) const;
  std::string to_json() const;
};

std::vector<double> default_theta_grid();

// Solves the relaxed problem for each theta in increasing order, starting
// every solve from the previous solution (feasible for the larger theta); the
// first start is the v-GNE at the naive baseline's leader decision.
SweepReport theta_sweep(const PevParams& params, std::vector<double> grid, const ScaConfig& cfg = {},
                        const NaiveConfig& naive = {});

struct CompareRun {
  std::uint64_t seed = 0;
  int sca_iters = 0;
  bool sca_converged = false;
  int naive_iters = 0;
  bool naive_converged = false;
  std::vector<double> sca_J0;
  std::vector<double> naive_J0;
  std::string status;
};

struct CompareReport {
  std::vector<CompareRun> runs;
  int sca_fewer = 0;  // seeds where the SCA method needed fewer outer iterations

  void write_csv(std::ostream& out) const;
  std::string to_json() const;
};

// Both methods start from the midpoint of Y0 and stop at the same tolerance.
CompareReport compare_algorithms(const PevParams& params, const std::vector<std::uint64_t>& seeds,
                                 const ScaConfig& cfg = {}, const NaiveConfig& naive = {}, double theta = 1e-2);

}  // namespace stackelberg
