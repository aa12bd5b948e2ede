#include "stackelberg/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace stackelberg {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec project_halfspace(const Halfspace& hs, const Vec& v) {
  const double excess = hs.a.dot(v) - hs.beta;
  if (excess <= 0.0) return v;
  const double norm_sq = hs.a.squaredNorm();
  if (norm_sq == 0.0) throw EmptyIntersectionError("halfspace 0^T u <= beta with beta < 0", excess);
  return v - (excess / norm_sq) * hs.a;
}

// argmin over lambda, mu >= 0 of 0.5(l-a)^2 + 0.5(m-b)^2 + 0.5 g (l+m)^2.
inline void pair_minimizer(double a, double b, double g, double& l, double& m) {
  const double s = (a + b) / (1.0 + 2.0 * g);
  l = 0.5 * (s + a - b);
  m = 0.5 * (s - a + b);
  if (l >= 0.0 && m >= 0.0) return;
  auto objective = [&](double x, double y) {
    return 0.5 * (x - a) * (x - a) + 0.5 * (y - b) * (y - b) + 0.5 * g * (x + y) * (x + y);
  };
  const double m_only = std::max(0.0, b / (1.0 + g));
  const double l_only = std::max(0.0, a / (1.0 + g));
  if (objective(0.0, m_only) <= objective(l_only, 0.0)) {
    l = 0.0;
    m = m_only;
  } else {
    l = l_only;
    m = 0.0;
  }
}

// Minimiser of 0.5||u - v||^2 + multiplier * (constraint) over u >= 0, written
// to `out`; returns the constraint value lambda^T mu + 0.5||u - anchor||^2 there.
double quad_sublevel_point(const QuadSublevel& set, const Vec& v, double multiplier, Vec& out) {
  const Index k = v.size() / 2;
  double value = 0.0;
  for (Index j = 0; j < k; ++j) {
    const double a = v[j] + multiplier * set.anchor[j];
    const double b = v[k + j] + multiplier * set.anchor[k + j];
    double l, m;
    pair_minimizer(a, b, multiplier, l, m);
    out[j] = l;
    out[k + j] = m;
    const double dl = l - set.anchor[j];
    const double dm = m - set.anchor[k + j];
    value += l * m + 0.5 * (dl * dl + dm * dm);
  }
  return value;
}

// The constraint value along the multiplier path is nonincreasing, so the
// multiplier is bracketed and refined by the Illinois variant of regula falsi
// until the bracket collapses to rounding level. The feasible end is returned.
Vec project_quad_sublevel(const QuadSublevel& set, const Vec& v) {
  Vec clipped = v.cwiseMax(0.0);
  if (quad_sublevel_value(set.anchor, clipped) <= set.theta) return clipped;

  Vec at_hi(v.size());
  Vec trial(v.size());
  double lo = 0.0;
  double f_lo = quad_sublevel_value(set.anchor, clipped) - set.theta;
  double hi = 1.0;
  double f_hi = quad_sublevel_point(set, v, hi, at_hi) - set.theta;
  int doublings = 0;
  while (f_hi > 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    if (++doublings > 200) {
      throw EmptyIntersectionError("convexified complementarity set is empty", f_hi);
    }
    f_hi = quad_sublevel_point(set, v, hi, at_hi) - set.theta;
  }
  int side = 0;
  for (int it = 0; it < 300 && f_hi < 0.0; ++it) {
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double g = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(g > lo && g < hi)) g = 0.5 * (lo + hi);
    const double f = quad_sublevel_point(set, v, g, trial) - set.theta;
    if (f > 0.0) {
      lo = g;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = g;
      f_hi = f;
      at_hi.swap(trial);
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return at_hi;
}

Vec project_polyhedron(const Polyhedron& poly, const Vec& v, const DykstraOptions& options) {
  std::vector<ConvexSetDescriptor> rows;
  rows.reserve(static_cast<std::size_t>(poly.G.rows()));
  for (Index r = 0; r < poly.G.rows(); ++r) {
    rows.emplace_back(Halfspace{poly.G.row(r).transpose(), poly.h[r]});
  }
  if (rows.empty()) return v;
  if (rows.size() == 1) return project_halfspace(std::get<Halfspace>(rows.front()), v);
  return dykstra(rows, v, options);
}

}  // namespace

double quad_sublevel_value(const Vec& anchor, const Vec& nu) {
  const Index k = nu.size() / 2;
  return nu.head(k).dot(nu.tail(k)) + 0.5 * (nu - anchor).squaredNorm();
}

Index dimension(const ConvexSetDescriptor& set) {
  return std::visit(Overloaded{
                        [](const Box& b) { return b.lo.size(); },
                        [](const NonnegOrthant& o) { return o.dim; },
                        [](const Halfspace& h) { return h.a.size(); },
                        [](const Polyhedron& p) { return p.G.cols(); },
                        [](const QuadSublevel& q) { return q.anchor.size(); },
                    },
                    set);
}

void validate(const ConvexSetDescriptor& set) {
  std::visit(Overloaded{
                 [](const Box& b) {
                   if (b.lo.size() != b.hi.size()) throw PreconditionError("box bounds differ in size");
                   if ((b.lo.array() > b.hi.array()).any()) throw PreconditionError("box has lo > hi");
                 },
                 [](const NonnegOrthant&) {},
                 [](const Halfspace&) {},
                 [](const Polyhedron& p) {
                   if (p.G.rows() != p.h.size()) throw PreconditionError("polyhedron rows mismatch");
                 },
                 [](const QuadSublevel& q) {
                   if (q.anchor.size() % 2 != 0) throw PreconditionError("anchor length must be even");
                   if (!(q.theta > 0.0)) throw PreconditionError("theta must be positive");
                   if ((q.anchor.array() < 0.0).any()) throw PreconditionError("anchor must be nonnegative");
                 },
             },
             set);
}

double violation(const ConvexSetDescriptor& set, const Vec& u) {
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            if (u.size() == 0) return 0.0;
            return std::max({0.0, (b.lo - u).maxCoeff(), (u - b.hi).maxCoeff()});
          },
          [&](const NonnegOrthant&) { return u.size() ? std::max(0.0, -u.minCoeff()) : 0.0; },
          [&](const Halfspace& h) { return std::max(0.0, h.a.dot(u) - h.beta); },
          [&](const Polyhedron& p) {
            return p.G.rows() ? std::max(0.0, (p.G * u - p.h).maxCoeff()) : 0.0;
          },
          [&](const QuadSublevel& q) {
            const double neg = u.size() ? std::max(0.0, -u.minCoeff()) : 0.0;
            return std::max(neg, quad_sublevel_value(q.anchor, u) - q.theta);
          },
      },
      set);
}

Vec project(const ConvexSetDescriptor& set, const Vec& v, const DykstraOptions& options) {
  if (dimension(set) != v.size()) throw PreconditionError("projection dimension mismatch");
  return std::visit(Overloaded{
                        [&](const Box& b) { return Vec(v.cwiseMax(b.lo).cwiseMin(b.hi)); },
                        [&](const NonnegOrthant&) { return Vec(v.cwiseMax(0.0)); },
                        [&](const Halfspace& h) { return project_halfspace(h, v); },
                        [&](const Polyhedron& p) { return project_polyhedron(p, v, options); },
                        [&](const QuadSublevel& q) { return project_quad_sublevel(q, v); },
                    },
                    set);
}

Vec dykstra(std::span<const ConvexSetDescriptor> sets, const Vec& v, const DykstraOptions& options) {
  if (sets.empty()) return v;
  if (sets.size() == 1) return project(sets.front(), v, options);
  std::vector<Vec> increments(sets.size(), Vec::Zero(v.size()));
  Vec x = v;
  double change = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iter; ++it) {
    Vec sweep_start = x;
    // The iterate can stall for many sweeps while the increments still move,
    // so both must settle before stopping.
    change = 0.0;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      Vec shifted = x + increments[k];
      Vec y = project(sets[k], shifted, options);
      Vec increment = shifted - y;
      change = std::max(change, (increment - increments[k]).lpNorm<Eigen::Infinity>());
      increments[k] = std::move(increment);
      x = std::move(y);
    }
    change = std::max(change, (x - sweep_start).lpNorm<Eigen::Infinity>());
    if (change <= options.tol) break;
  }
  // On disjoint sets the iterate settles while the increments diverge, so
  // hitting the cap is not proof of an intersection point either.
  double worst = 0.0;
  for (const auto& set : sets) worst = std::max(worst, violation(set, x));
  if (worst > 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
    throw EmptyIntersectionError(
        "Dykstra stalled with violation " + std::to_string(worst) + "; intersection may be empty",
        worst);
  }
  if (change <= options.tol) return x;
  throw IterationLimitError("Dykstra did not converge", change);
}

Vec project_box_halfspace(const Vec& lo, const Vec& hi, const Vec& a, double beta, const Vec& v) {
  auto at = [&](double g) { return Vec((v - g * a).cwiseMax(lo).cwiseMin(hi)); };
  Vec x = at(0.0);
  if (a.dot(x) <= beta) return x;
  // Smallest value of a^T u over the box.
  const double floor = (a.array() > 0.0).select(lo, hi).dot(a);
  if (floor > beta) throw EmptyIntersectionError("box and halfspace do not intersect", floor - beta);
  double g_lo = 0.0;
  double g_hi = 1.0;
  Vec x_hi = at(g_hi);
  while (a.dot(x_hi) > beta) {
    g_lo = g_hi;
    g_hi *= 2.0;
    x_hi = at(g_hi);
  }
  for (int it = 0; it < 200 && g_hi - g_lo > 1e-15 * std::max(1.0, g_hi); ++it) {
    const double mid = 0.5 * (g_lo + g_hi);
    Vec x_mid = at(mid);
    if (a.dot(x_mid) > beta) {
      g_lo = mid;
    } else {
      g_hi = mid;
      x_hi = std::move(x_mid);
    }
  }
  return x_hi;
}

}  // namespace stackelberg
