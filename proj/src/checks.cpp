#include "stackelberg/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "stackelberg/projections.hpp"
#include "stackelberg/vgne.hpp"

namespace stackelberg {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Vec uniform_in(const Vec& lo, const Vec& hi, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(lo.size());
  for (Index k = 0; k < lo.size(); ++k) {
    const double a = std::isfinite(lo[k]) ? lo[k] : -1.0;
    const double b = std::isfinite(hi[k]) ? hi[k] : a + 2.0;
    v[k] = a + (b - a) * u(gen);
  }
  return v;
}

// A point of X: the box of each follower, or the Dykstra projection of a
// Gaussian draw for general polyhedra.
Vec random_x(const AggregativeGame& game, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x(game.n());
  for (Index i = 0; i < game.N(); ++i) {
    const auto& local = game.local(i);
    const Index ni = game.dim(i);
    if (local.is_box()) {
      x.segment(game.offset(i), ni) = uniform_in(local.box_lo(), local.box_hi(), gen);
    } else {
      Vec v(ni);
      for (Index k = 0; k < ni; ++k) v[k] = normal(gen);
      x.segment(game.offset(i), ni) = project(Polyhedron{local.F(), local.g()}, v, {1e-12, 100000});
    }
  }
  return x;
}

Vec random_y0(const AggregativeGame& game, std::mt19937_64& gen) {
  return project_leader_set(game, uniform_in(game.leader().lo, game.leader().hi, gen));
}

double relative_error(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

}  // namespace

CheckResult check_pseudo_gradient(const AggregativeGame& game, int samples, std::uint64_t seed, double tol) {
  CheckResult r{"pseudo-gradient matches central differences", true, 0.0, ""};
  std::mt19937_64 gen(seed);
  const double h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const Vec y0 = random_y0(game, gen);
    const Vec x = random_x(game, gen);
    const Vec H = game.pseudo_gradient(y0, x);
    Vec fd(game.n());
    for (Index i = 0; i < game.N(); ++i) {
      for (Index k = 0; k < game.dim(i); ++k) {
        const Index j = game.offset(i) + k;
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (game.follower_cost(i, y0, xp) - game.follower_cost(i, y0, xm)) / (2.0 * h);
      }
    }
    r.worst = std::max(r.worst, relative_error(H, fd));
  }
  r.pass = r.worst <= tol;
  r.detail = "max relative error " + sci(r.worst);
  return r;
}

CheckResult check_leader_gradient(const AggregativeGame& game, int samples, std::uint64_t seed, double tol) {
  CheckResult r{"leader gradient matches central differences", true, 0.0, ""};
  std::mt19937_64 gen(seed);
  const double h = 1e-6;
  const Index n0 = game.n0();
  for (int s = 0; s < samples; ++s) {
    const Vec y0 = random_y0(game, gen);
    const Vec x = random_x(game, gen);
    const Vec g = game.leader_grad(y0, x);
    Vec fd(n0 + game.n());
    for (Index j = 0; j < fd.size(); ++j) {
      Vec yp = y0, ym = y0, xp = x, xm = x;
      if (j < n0) {
        yp[j] += h;
        ym[j] -= h;
      } else {
        xp[j - n0] += h;
        xm[j - n0] -= h;
      }
      fd[j] = (game.leader_cost(yp, xp) - game.leader_cost(ym, xm)) / (2.0 * h);
    }
    r.worst = std::max(r.worst, relative_error(g, fd));
  }
  r.pass = r.worst <= tol;
  r.detail = "max relative error " + sci(r.worst);
  return r;
}

CheckResult check_antidiagonal_identity(Index half, int samples, std::uint64_t seed) {
  CheckResult r{"0.5 nu^T P nu equals lambda^T mu", true, 0.0, ""};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Mat P = antidiagonal_identity(half);
  for (int s = 0; s < samples; ++s) {
    Vec nu(2 * half);
    for (Index k = 0; k < nu.size(); ++k) nu[k] = normal(gen);
    const double lhs = 0.5 * nu.dot(P * nu);
    const double rhs = nu.head(half).dot(nu.tail(half));
    r.worst = std::max(r.worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  r.pass = r.worst <= 1e-12;
  r.detail = "max relative gap " + sci(r.worst);
  return r;
}

std::vector<OmegaPoint> sample_relaxed_points(const StackedSystem& sys, const RelaxationParams& params, int count,
                                              std::uint64_t seed) {
  const auto& game = sys.game();
  std::mt19937_64 gen(seed);
  std::vector<OmegaPoint> points;
  for (int k = 0; k < count; ++k) points.push_back(feasible_init(sys, params, random_y0(game, gen)));
  return points;
}

CheckResult check_strong_convexity(const StackedSystem& sys, const std::vector<OmegaPoint>& points, double sigma,
                                   int samples, std::uint64_t seed, double tol) {
  CheckResult r{"surrogate strong convexity", true, 0.0, ""};
  if (points.empty()) throw PreconditionError("strong convexity check needs sample points");
  const auto& game = sys.game();
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const OmegaPoint& anchor = points[pick(gen)];
    const Vec c_head = game.leader_grad(Vec(anchor.y0()), Vec(anchor.x()));
    Vec c = Vec::Zero(anchor.data.size());
    c.head(c_head.size()) = c_head;
    auto cost = [&](const Vec& w) { return c.dot(w) + 0.5 * sigma * (w - anchor.data).squaredNorm(); };
    auto grad = [&](const Vec& w) { return Vec(c + sigma * (w - anchor.data)); };
    const Vec& w1 = points[pick(gen)].data;
    Vec w2 = points[pick(gen)].data;
    for (Index k = 0; k < w2.size(); ++k) w2[k] += 0.1 * normal(gen);
    const double slack = cost(w2) - cost(w1) - grad(w1).dot(w2 - w1) - 0.5 * sigma * (w2 - w1).squaredNorm();
    worst = std::min(worst, slack);
  }
  r.worst = worst;
  r.pass = worst >= -tol;
  r.detail = "smallest slack " + sci(worst);
  return r;
}

CheckResult check_anchor_lipschitz(const StackedSystem& sys, const std::vector<OmegaPoint>& points, double sigma,
                                   int samples, std::uint64_t seed, double tol) {
  CheckResult r{"surrogate gradient Lipschitz in the anchor", true, 0.0, ""};
  if (points.size() < 2) throw PreconditionError("anchor Lipschitz check needs two sample points");
  const auto& game = sys.game();
  const double kappa0 = leader_lipschitz(game);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  auto grad = [&](const Vec& w, const OmegaPoint& anchor) {
    Vec g = sigma * (w - anchor.data);
    g.head(game.n0() + game.n()) += game.leader_grad(Vec(anchor.y0()), Vec(anchor.x()));
    return g;
  };
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const OmegaPoint& a = points[pick(gen)];
    const OmegaPoint& b = points[pick(gen)];
    const Vec& w = points[pick(gen)].data;
    const double slack = (kappa0 + sigma) * (a.data - b.data).norm() - (grad(w, a) - grad(w, b)).norm();
    worst = std::min(worst, slack);
  }
  r.worst = worst;
  r.pass = worst >= -tol;
  r.detail = "smallest slack " + sci(worst);
  return r;
}

}  // namespace stackelberg
