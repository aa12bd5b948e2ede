#include "stackelberg/pev.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <json.hpp>

#include "stackelberg/parallel.hpp"
#include "stackelberg/vgne.hpp"

namespace stackelberg {
namespace {

constexpr double kHourlyDemand[24] = {0.55, 0.50, 0.47, 0.45, 0.45, 0.48, 0.58, 0.72, 0.82, 0.86, 0.88, 0.90,
                                      0.89, 0.87, 0.86, 0.87, 0.92, 1.00, 1.05, 1.02, 0.95, 0.85, 0.72, 0.62};

double slot_hour(Index t, Index T) { return 24.0 * static_cast<double>(t) / static_cast<double>(T); }

}  // namespace

Vec default_demand_profile(Index T) {
  Vec D(T);
  for (Index t = 0; t < T; ++t) {
    const double h = slot_hour(t, T);
    const int lo = static_cast<int>(std::floor(h)) % 24;
    const double w = h - std::floor(h);
    D[t] = (1.0 - w) * kHourlyDemand[lo] + w * kHourlyDemand[(lo + 1) % 24];
  }
  return D;
}

Vec default_capacity_profile(Index T) {
  Vec C(T);
  for (Index t = 0; t < T; ++t) {
    const double h = slot_hour(t, T);
    C[t] = (h >= 23.0 || h < 8.0) ? 1.5 : 0.5;
  }
  return C;
}

void PevParams::validate() const {
  if (N <= 0 || T <= 0) throw PreconditionError("PEV instance needs N > 0 and T > 0");
  if (!(q > 0.0) || !(c > 0.0) || !(kappa_sd >= 0.0) || !(s_lo > 0.0) || !(s_hi >= s_lo) || !(delta >= 0.0) ||
      !(p_bar > 0.0)) {
    throw PreconditionError("PEV scalars must be positive");
  }
  if (!(x_hi > x_lo)) throw PreconditionError("PEV charging box needs x_lo < x_hi");
  if (D.size() != 0 && D.size() != T) throw PreconditionError("demand profile must have length T");
  if (capacity.size() != 0 && capacity.size() != T) throw PreconditionError("capacity profile must have length T");
  if (capacity.size() != 0 && !(capacity.minCoeff() > 0.0)) throw PreconditionError("capacity must be positive");
}

Vec PevParams::demand() const { return D.size() ? D : default_demand_profile(T); }

Vec PevParams::capacity_profile() const { return capacity.size() ? capacity : default_capacity_profile(T); }

PevDraw draw_pev(const PevParams& params) {
  std::mt19937_64 gen(params.seed);
  std::uniform_real_distribution<double> uniform(params.s_lo, params.s_hi);
  std::normal_distribution<double> normal(params.kappa_mean, params.kappa_sd);
  PevDraw draw;
  draw.s.resize(params.N);
  for (Index i = 0; i < params.N; ++i) {
    draw.s[i] = uniform(gen);
    Vec kappa(params.T);
    for (Index t = 0; t < params.T; ++t) kappa[t] = normal(gen);
    draw.kappa.push_back(std::move(kappa));
  }
  return draw;
}

AggregativeGame generate_instance(const PevParams& params) {
  params.validate();
  const Index N = params.N;
  const Index T = params.T;
  const PevDraw draw = draw_pev(params);
  const double shrink = 1.0 - 1.0 / static_cast<double>(N);
  const Mat I = Mat::Identity(T, T);

  Mat F(2 * T, T);
  F << I, -I;
  Vec g(2 * T);
  g << Vec::Constant(T, params.x_hi), Vec::Constant(T, -params.x_lo);

  std::vector<FollowerData> followers;
  for (Index i = 0; i < N; ++i) {
    FollowerData f;
    f.Q = 2.0 * (params.q + draw.s[i] + params.delta * shrink * shrink) * I;
    f.C = InteractionRow::uniform(Mat::Zero(T, T), -2.0 * params.delta * shrink * I, N, i);
    f.C0 = -I;
    f.F = F;
    f.g = g;
    f.A = I / static_cast<double>(N);
    f.h = Vec::Constant(T, params.c) - draw.kappa[static_cast<std::size_t>(i)];
    followers.push_back(std::move(f));
  }

  LeaderData leader;
  leader.n0 = T;
  leader.lo = Vec::Zero(T);
  leader.hi = Vec::Constant(T, params.p_bar);
  leader.R0 = Mat::Zero(T, T);
  leader.r0 = -params.demand();
  leader.S.assign(static_cast<std::size_t>(N), -I / static_cast<double>(N));
  leader.t.assign(static_cast<std::size_t>(N), Vec::Zero(T));
  return AggregativeGame(std::move(leader), std::move(followers), params.capacity_profile());
}

double pev_follower_cost(const PevParams& params, const PevDraw& draw, Index i, const Vec& p, const Vec& x) {
  const Index T = params.T;
  Vec sigma = Vec::Zero(T);
  for (Index j = 0; j < params.N; ++j) sigma += x.segment(j * T, T);
  sigma /= static_cast<double>(params.N);
  const auto xi = x.segment(i * T, T);
  const Vec linear = Vec::Constant(T, params.c) - draw.kappa[static_cast<std::size_t>(i)] - p;
  return (params.q + draw.s[i]) * xi.squaredNorm() + linear.dot(xi) + params.delta * (xi - sigma).squaredNorm();
}

std::vector<double> default_theta_grid() { return {1e-6, 1e-4, 1e-2, 1e-1, 1.0}; }

void SweepReport::write_csv(std::ostream& out) const {
  out << "theta,J0_star,dJ_star_max,outer_iters,status\n";
  const auto old = out.precision(17);
  for (const auto& p : points) {
    out << p.theta << ',' << p.J0_star << ',' << p.dJ_star_max << ',' << p.outer_iters << ',' << p.status << '\n';
  }
  out.precision(old);
}

std::string SweepReport::to_json() const {
  nlohmann::json j;
  j["grid"] = grid;
  j["points"] = nlohmann::json::array();
  double j0_min = 0.0, j0_max = 0.0, dj_max = 0.0;
  bool first = true;
  for (const auto& p : points) {
    if (p.status != "ok") continue;
    j0_min = first ? p.J0_star : std::min(j0_min, p.J0_star);
    j0_max = first ? p.J0_star : std::max(j0_max, p.J0_star);
    dj_max = std::max(dj_max, p.dJ_star_max);
    first = false;
  }
  for (const auto& p : points) {
    nlohmann::json e{{"theta", p.theta},
                     {"J0_star", p.J0_star},
                     {"dJ_star_max", p.dJ_star_max},
                     {"outer_iters", p.outer_iters},
                     {"status", p.status}};
    // Curves rescaled to [0, 1], as plotted against theta.
    e["J0_normalized"] = j0_max > j0_min ? (p.J0_star - j0_min) / (j0_max - j0_min) : 0.0;
    e["dJ_normalized"] = dj_max > 0.0 ? p.dJ_star_max / dj_max : 0.0;
    j["points"].push_back(std::move(e));
  }
  return j.dump(2);
}

SweepReport theta_sweep(const PevParams& params, std::vector<double> grid, const ScaConfig& cfg,
                        const NaiveConfig& naive) {
  if (grid.empty()) throw PreconditionError("theta grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double theta : grid) {
    if (!(theta > 0.0) || theta > 1.0) throw PreconditionError("theta grid must lie in (0, 1]");
  }
  auto game = std::make_shared<const AggregativeGame>(generate_instance(params));
  auto sys = std::make_shared<const StackedSystem>(game);
  const PevDraw draw = draw_pev(params);

  const NaiveResult seed = naive_run(*game, naive);
  OmegaPoint w = feasible_init(*sys, RelaxationParams::uniform(grid.front(), game->N()), seed.y0);

  SweepReport report;
  report.grid = grid;
  Vec baseline_costs;
  for (double theta : grid) {
    SweepPoint point;
    point.theta = theta;
    try {
      const ScaResult r = run(sys, RelaxationParams::uniform(theta, game->N()), cfg, w);
      w = r.omega;
      point.outer_iters = r.iterations;
      point.status = r.converged ? "ok" : "max_outer";
    } catch (const Error& e) {
      point.status = std::string("error: ") + e.what();
    }
    const Vec p = w.y0();
    const Vec x = w.x();
    point.J0_star = game->leader_cost(p, x);
    point.follower_costs.resize(game->N());
    for (Index i = 0; i < game->N(); ++i) point.follower_costs[i] = pev_follower_cost(params, draw, i, p, x);
    if (baseline_costs.size() == 0) baseline_costs = point.follower_costs;
    point.dJ_star_max = (point.follower_costs - baseline_costs).maxCoeff();
    report.points.push_back(std::move(point));
  }
  return report;
}

void CompareReport::write_csv(std::ostream& out) const {
  out << "seed,sca_iters,sca_converged,naive_iters,naive_converged,status\n";
  for (const auto& r : runs) {
    out << r.seed << ',' << r.sca_iters << ',' << (r.sca_converged ? 1 : 0) << ',' << r.naive_iters << ','
        << (r.naive_converged ? 1 : 0) << ',' << r.status << '\n';
  }
}

std::string CompareReport::to_json() const {
  nlohmann::json j;
  j["sca_fewer"] = sca_fewer;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    j["runs"].push_back({{"seed", r.seed},
                         {"sca_iters", r.sca_iters},
                         {"sca_converged", r.sca_converged},
                         {"naive_iters", r.naive_iters},
                         {"naive_converged", r.naive_converged},
                         {"sca_J0", r.sca_J0},
                         {"naive_J0", r.naive_J0},
                         {"status", r.status}});
  }
  return j.dump(2);
}

CompareReport compare_algorithms(const PevParams& params, const std::vector<std::uint64_t>& seeds,
                                 const ScaConfig& cfg, const NaiveConfig& naive, double theta) {
  if (seeds.empty()) throw PreconditionError("compare needs at least one seed");
  CompareReport report;
  report.runs.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    CompareRun& run_k = report.runs[k];
    run_k.seed = seeds[k];
    try {
      PevParams p = params;
      p.seed = seeds[k];
      auto game = std::make_shared<const AggregativeGame>(generate_instance(p));
      auto sys = std::make_shared<const StackedSystem>(game);

      NaiveConfig ncfg = naive;
      ncfg.tol = cfg.outer_tol;
      const NaiveResult nr = naive_run(*game, ncfg);
      run_k.naive_iters = nr.iterations;
      run_k.naive_converged = nr.converged;
      for (const auto& row : nr.trace.rows) run_k.naive_J0.push_back(row.J0);

      const auto relax = RelaxationParams::uniform(theta, game->N());
      const OmegaPoint w0 = feasible_init(*sys, relax, game->y0_midpoint());
      const ScaResult sr = run(sys, relax, cfg, w0);
      run_k.sca_iters = sr.iterations;
      run_k.sca_converged = sr.converged;
      for (const auto& row : sr.trace.rows) run_k.sca_J0.push_back(row.J0);
      run_k.status = "ok";
    } catch (const Error& e) {
      run_k.status = std::string("error: ") + e.what();
    }
  });
  for (const auto& r : report.runs) {
    if (r.sca_converged && (!r.naive_converged || r.sca_iters < r.naive_iters)) ++report.sca_fewer;
  }
  return report;
}

}  // namespace stackelberg
