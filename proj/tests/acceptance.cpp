// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stackelberg/baseline.hpp"
#include "stackelberg/checks.hpp"
#include "stackelberg/inner.hpp"
#include "stackelberg/pev.hpp"
#include "stackelberg/sca.hpp"
#include "stackelberg/vgne.hpp"
#include "support/desk.hpp"

using namespace stackelberg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// The PEV runs use sigma = 0.06: with kappa0 = 1/sqrt(N) = 0.1 at N = 100 the
// admissible steps are (0, 1.2), and alpha = 0.9 gives alpha/sigma = 15.
ScaConfig pev_config() {
  ScaConfig cfg;
  cfg.sigma = 0.06;
  cfg.inner = InnerSolver::reference;
  cfg.check_licq = false;
  return cfg;
}

PevParams pev_params(Index N, std::uint64_t seed = 1) {
  PevParams p;
  p.N = N;
  p.seed = seed;
  return p;
}

struct DeskRun {
  Index N = 0;
  std::shared_ptr<const StackedSystem> sys;
  RelaxationParams params;
  ScaResult result;
};

// Desk instances for criteria 1 and 2. The N = 100 run is capped at 300 outer
// iterations: its gradient scales like 1/N and it does not settle within the
// time budget, while every iterate it does produce is checked.
std::vector<DeskRun> desk_runs(double& elapsed) {
  const auto t0 = Clock::now();
  std::vector<DeskRun> runs;
  for (Index N : {2, 5, 100}) {
    desk::RandomSpec spec;
    spec.N = N;
    spec.seed = 7;
    DeskRun r;
    r.N = N;
    r.sys = desk::stacked(desk::random_game(spec));
    r.params = RelaxationParams::uniform(1e-2, N);
    ScaConfig cfg;
    cfg.inner = InnerSolver::reference;
    cfg.keep_iterates = true;
    cfg.check_licq = false;
    if (N == 100) cfg.max_outer = 300;
    r.result = run(r.sys, r.params, cfg, feasible_init(*r.sys, r.params, r.sys->game().y0_midpoint()));
    runs.push_back(std::move(r));
  }
  elapsed = seconds_since(t0);
  return runs;
}

Outcome criterion1(const std::vector<DeskRun>& runs, double elapsed) {
  Outcome o{true, ""};
  std::size_t iterates = 0;
  double eq = 0.0, neg = 0.0, excess = 0.0;
  for (const auto& r : runs) {
    for (const Vec& w : r.result.iterates) {
      const auto rep = residuals(*r.sys, r.params, OmegaPoint(r.sys->layout(), w));
      eq = std::max(eq, rep.equality);
      neg = std::max(neg, rep.bound_violation);
      excess = std::max({excess, rep.complementarity_excess, rep.local_complementarity_excess});
      o.pass = o.pass && rep.equality <= 1e-8 && rep.bound_violation <= 1e-12 && rep.complementarity_excess <= 1e-8 &&
               rep.local_complementarity_excess <= 1e-8 && rep.leader_violation <= 1e-12;
      ++iterates;
    }
  }
  o.pass = o.pass && elapsed < 120.0;
  o.detail = std::to_string(iterates) + " iterates over N in {2, 5, 100}; " +
             fmt("max equality %.2e, negativity %.2e, complementarity excess %.2e; %.1f s", eq, neg, excess, elapsed);
  return o;
}

Outcome criterion2(const std::vector<const SolveTrace*>& traces) {
  Outcome o{true, ""};
  std::size_t rows = 0;
  double worst = 0.0;
  for (const auto* t : traces) {
    for (const auto& row : t->rows) {
      const double slack = row.descent_lhs - row.descent_rhs + 1e-6 * (1.0 + row.descent_rhs);
      worst = std::min(worst, slack);
      o.pass = o.pass && slack >= 0.0;
      ++rows;
    }
  }
  o.detail = std::to_string(rows) + " outer iterations; " + fmt("worst slack %.2e", worst);
  return o;
}

Outcome criterion3(const ScaResult& r, double elapsed) {
  bool monotone = true;
  for (std::size_t k = 1; k < r.trace.rows.size(); ++k) {
    monotone = monotone && r.trace.rows[k].J0 <= r.trace.rows[k - 1].J0 + 1e-9;
  }
  int reached = -1;
  for (const auto& row : r.trace.rows) {
    if (row.k > 0 && row.step_norm <= 1e-4) {
      reached = row.k;
      break;
    }
  }
  Outcome o;
  o.pass = monotone && reached >= 0 && reached < 500;
  o.detail = std::string("J0 ") + (monotone ? "non-increasing" : "increased") + "; step <= 1e-4 " +
             (reached >= 0 ? "at outer iteration " + std::to_string(reached) : std::string("never reached")) +
             fmt("; final J0 %.6f, alpha %.2f; %.0f s", r.trace.rows.empty() ? 0.0 : r.trace.rows.back().J0, r.alpha,
                 elapsed);
  return o;
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  Outcome o{true, ""};
  double worst = 0.0, worst_kkt = 0.0;
  int solved = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    desk::RandomSpec spec;
    spec.N = 2 + static_cast<Index>(k % 4);
    spec.seed = 100 + k;
    const auto sys = desk::stacked(desk::random_game(spec));
    const auto params = RelaxationParams::uniform(k % 2 ? 1e-2 : 1e-1, spec.N);
    std::mt19937_64 gen(k);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec y0(spec.n0);
    for (Index j = 0; j < y0.size(); ++j) y0[j] = u(gen);
    const auto sub = convexify(sys, params, 1.0, feasible_init(*sys, params, y0));
    try {
      const auto ref = reference_solve(sub);
      const auto adal = adal_run(sub);
      const double err = (adal.omega.data - ref.omega.data).norm();
      worst = std::max(worst, err);
      worst_kkt = std::max(worst_kkt, ref.kkt_residual);
      o.pass = o.pass && err <= 1e-4 && ref.kkt_residual <= 1e-9;
      ++solved;
    } catch (const Error& e) {
      o.pass = false;
      o.detail = std::string("subproblem ") + std::to_string(k) + ": " + e.what() + "; ";
    }
  }
  const double elapsed = seconds_since(t0);
  o.pass = o.pass && elapsed < 120.0;
  o.detail += std::to_string(solved) + "/20 solved; " +
              fmt("max ||adal - reference|| %.2e, max reference KKT %.2e; %.1f s", worst, worst_kkt, elapsed);
  return o;
}

// N = 10 vehicles at the default sigma, theta = 1e-2 and default rho, tau;
// 20 outer iterations.
Outcome criterion5() {
  const auto t0 = Clock::now();
  auto game = std::make_shared<const AggregativeGame>(generate_instance(pev_params(10)));
  auto sys = std::make_shared<const StackedSystem>(game);
  const auto params = RelaxationParams::uniform(1e-2, 10);
  ScaConfig cfg;
  cfg.inner = InnerSolver::adal;
  cfg.max_outer = 20;
  cfg.check_licq = false;
  Outcome o;
  try {
    const auto r = run(sys, params, cfg, feasible_init(*sys, params, game->y0_midpoint()));
    double sum = 0.0;
    int lo = 1 << 30, hi = 0;
    for (const auto& row : r.trace.rows) {
      sum += row.inner_iters;
      lo = std::min(lo, row.inner_iters);
      hi = std::max(hi, row.inner_iters);
    }
    const double mean = sum / static_cast<double>(r.trace.rows.size());
    o.pass = mean >= 10.0 && mean <= 500.0;
    o.detail = std::to_string(r.trace.rows.size()) + " outer steps; " +
               fmt("inner iterations mean %.1f, min %.0f, max %.0f; %.0f s", mean, lo, hi, seconds_since(t0));
  } catch (const Error& e) {
    o.pass = false;
    o.detail = e.what();
  }
  return o;
}

Outcome criterion6() {
  const auto clamp = solve_vgne(desk::single_clamp(), desk::v1(0.5));
  const auto pair = solve_vgne(desk::two_symmetric(), desk::v1(4.0));
  const double e1 = std::max(std::abs(clamp.x[0]), std::abs(clamp.lambda_local[0][1] - 0.5));
  const double e2 = std::max({std::abs(pair.x[0] - 1.0), std::abs(pair.x[1] - 1.0), std::abs(pair.lambda[0] - 2.0)});
  return {e1 <= 1e-8 && e2 <= 1e-8, fmt("clamp error %.2e, symmetric pair error %.2e", e1, e2)};
}

Outcome criterion7() {
  const PevParams p = pev_params(10);
  const auto pev = generate_instance(p);
  desk::RandomSpec spec;
  spec.N = 5;
  const auto desk_game = desk::random_game(spec);
  const std::vector<CheckResult> checks{
      check_pseudo_gradient(pev, 20, 1), check_leader_gradient(pev, 20, 2),
      check_pseudo_gradient(desk_game, 20, 3), check_leader_gradient(desk_game, 20, 4)};
  double worst = 0.0;
  bool pass = true;
  for (const auto& c : checks) {
    worst = std::max(worst, c.worst);
    pass = pass && c.pass;
  }
  // The expansion against the vehicle cost as defined, not the canonical form.
  const auto draw = draw_pev(p);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double expansion = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(pev.n()), price(p.T);
    for (Index k = 0; k < x.size(); ++k) x[k] = u(gen);
    for (Index k = 0; k < price.size(); ++k) price[k] = u(gen);
    const Vec H = pev.pseudo_gradient(price, x);
    for (Index i = 0; i < p.N; ++i) {
      for (Index t = 0; t < p.T; ++t) {
        const Index k = i * p.T + t;
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const double fd =
            (pev_follower_cost(p, draw, i, price, xp) - pev_follower_cost(p, draw, i, price, xm)) / (2.0 * h);
        expansion = std::max(expansion, std::abs(fd - H[k]) / std::max(1.0, std::abs(H[k])));
      }
    }
  }
  pass = pass && expansion <= 1e-6;
  return {pass, fmt("max relative error %.2e (canonical gradients), %.2e (PEV expansion)", worst, expansion)};
}

// Both methods stop at the same tolerance. The baseline runs first; the SCA
// run is then capped at the baseline's count, since it can only count as
// faster by stopping before that.
Outcome criterion8() {
  const auto t0 = Clock::now();
  int fewer = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto game = std::make_shared<const AggregativeGame>(generate_instance(pev_params(100, seed)));
    auto sys = std::make_shared<const StackedSystem>(game);
    ScaConfig cfg = pev_config();
    NaiveConfig naive;
    naive.tol = cfg.outer_tol;
    const auto nr = naive_run(*game, naive);
    const auto params = RelaxationParams::uniform(1.0, game->N());
    if (nr.converged) cfg.max_outer = std::max(1, nr.iterations - 1);
    const auto sr = run(sys, params, cfg, feasible_init(*sys, params, game->y0_midpoint()));
    const bool sca_first = sr.converged && (!nr.converged || sr.iterations < nr.iterations);
    fewer += sca_first ? 1 : 0;
    per_seed += (seed > 1 ? " " : "") + std::to_string(nr.iterations) + (sca_first ? "+" : "-");
  }
  return {fewer >= 7, std::to_string(fewer) + "/10 seeds with fewer SCA iterations; baseline iterations per seed " +
                          per_seed + fmt("; %.0f s", seconds_since(t0))};
}

Outcome criterion9() {
  const auto t0 = Clock::now();
  const auto report = theta_sweep(pev_params(100), default_theta_grid(), pev_config());
  const auto& pts = report.points;
  bool pass = pts.size() == 5 && pts.front().theta == 1e-6 && pts.front().dJ_star_max == 0.0;
  double min_dj = 0.0;
  std::string statuses;
  for (const auto& p : pts) {
    min_dj = std::min(min_dj, p.dJ_star_max);
    statuses += (statuses.empty() ? "" : " ") + p.status;
  }
  pass = pass && min_dj >= -1e-6 && pts.back().J0_star <= pts.front().J0_star + 1e-6;
  return {pass, fmt("dJ*(1e-6) = %.1e, min dJ* %.2e, J0*(1e-6) %.6f, J0*(1) %.6f", pts.front().dJ_star_max, min_dj,
                    pts.front().J0_star, pts.back().J0_star) +
                    "; status " + statuses + fmt("; %.0f s", seconds_since(t0))};
}

Outcome criterion10() {
  desk::RandomSpec spec;
  spec.N = 5;
  const auto desk_sys = desk::stacked(desk::random_game(spec));
  auto pev_game = std::make_shared<const AggregativeGame>(generate_instance(pev_params(10)));
  const auto pev_sys = std::make_shared<const StackedSystem>(pev_game);
  double worst = 0.0;
  bool pass = true;
  for (const auto& sys : {desk_sys, pev_sys}) {
    const auto params = RelaxationParams::uniform(1e-2, sys->game().N());
    const auto points = sample_relaxed_points(*sys, params, 10, 11);
    for (const auto& c : {check_strong_convexity(*sys, points, 1.0, 100, 12, 1e-9),
                          check_anchor_lipschitz(*sys, points, 1.0, 100, 13, 1e-9)}) {
      pass = pass && c.pass;
      worst = std::min(worst, c.worst);
    }
  }
  return {pass, fmt("100 samples per inequality on two instances; worst slack %.2e", worst)};
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes(10);
  auto report = [&](int k, const std::function<Outcome()>& f) {
    try {
      outcomes[static_cast<std::size_t>(k - 1)] = f();
    } catch (const std::exception& e) {
      outcomes[static_cast<std::size_t>(k - 1)] = {false, std::string("exception: ") + e.what()};
    }
    const auto& o = outcomes[static_cast<std::size_t>(k - 1)];
    std::printf("criterion %2d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  double desk_seconds = 0.0;
  std::vector<DeskRun> runs;
  ScaResult pev_run;
  double pev_seconds = 0.0;
  report(1, [&] {
    runs = desk_runs(desk_seconds);
    return criterion1(runs, desk_seconds);
  });
  report(2, [&] {
    const auto t0 = Clock::now();
    auto game = std::make_shared<const AggregativeGame>(generate_instance(pev_params(100)));
    auto sys = std::make_shared<const StackedSystem>(game);
    const auto params = RelaxationParams::uniform(1.0, game->N());
    pev_run = run(sys, params, pev_config(), feasible_init(*sys, params, game->y0_midpoint()));
    pev_seconds = seconds_since(t0);
    std::vector<const SolveTrace*> traces;
    for (const auto& r : runs) traces.push_back(&r.result.trace);
    traces.push_back(&pev_run.trace);
    return criterion2(traces);
  });
  report(3, [&] { return criterion3(pev_run, pev_seconds); });
  report(4, criterion4);
  report(5, criterion5);
  report(6, criterion6);
  report(7, criterion7);
  report(8, criterion8);
  report(9, criterion9);
  report(10, criterion10);

  int failed = 0;
  for (const auto& o : outcomes) failed += o.pass ? 0 : 1;
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
