#include "stackelberg/linalg.hpp"

#include <deque>

namespace stackelberg::linalg {

NnlsResult nonnegative_least_squares(const std::function<Vec(const Vec&)>& apply,
                                     const std::function<Vec(const Vec&)>& apply_transpose,
                                     const Vec& column_norms, const Vec& h, double tol,
                                     int max_iter) {
  const Index k = column_norms.size();
  NnlsResult result;
  result.z = Vec::Zero(k);
  if (k == 0) {
    result.residual = h.size() ? h.lpNorm<Eigen::Infinity>() : 0.0;
    return result;
  }
  Vec inv_scale(k);
  for (Index j = 0; j < k; ++j) inv_scale[j] = column_norms[j] > 0.0 ? 1.0 / column_norms[j] : 0.0;

  auto scaled = [&](const Vec& w) { return apply(inv_scale.cwiseProduct(w)); };
  auto scaled_t = [&](const Vec& r) { return Vec(inv_scale.cwiseProduct(apply_transpose(r))); };
  const double L =
      1.05 * power_iteration([&](const Vec& w) { return scaled_t(scaled(w)); }, k, 200) + 1e-300;

  const double scale = 1.0 + h.lpNorm<Eigen::Infinity>();
  Vec w = Vec::Zero(k);
  Vec w_prev = w;
  double t = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Vec y = w + ((t - 1.0) / t_next) * (w - w_prev);
    t = t_next;
    Vec grad = scaled_t(Vec(scaled(y) + h));
    Vec w_next = (y - grad / L).cwiseMax(0.0);
    result.iterations = it + 1;
    if ((y - w_next).dot(w_next - w) > 0.0) {
      w_prev = w_next;
      t = 1.0;
    } else {
      w_prev = w;
    }
    w = std::move(w_next);
    if (it % 10 == 0 || it + 1 == max_iter) {
      Vec r = scaled(w) + h;
      Vec g = scaled_t(r);
      const double kkt = (w - (w - g).cwiseMax(0.0)).lpNorm<Eigen::Infinity>();
      if (kkt <= tol * scale || r.lpNorm<Eigen::Infinity>() <= tol * scale) break;
    }
  }
  result.z = inv_scale.cwiseProduct(w);
  result.residual = (apply(result.z) + h).lpNorm<Eigen::Infinity>();
  return result;
}

Vec conjugate_gradient(const std::function<Vec(const Vec&)>& apply, const Vec& rhs, double tol,
                       int max_iter) {
  Vec x = Vec::Zero(rhs.size());
  Vec r = rhs;
  Vec p = r;
  double rs = r.squaredNorm();
  const double stop = tol * tol * std::max(1.0, rhs.squaredNorm());
  for (int k = 0; k < max_iter && rs > stop; ++k) {
    Vec Ap = apply(p);
    const double curvature = p.dot(Ap);
    if (curvature <= 0.0) break;
    const double step = rs / curvature;
    x += step * p;
    r -= step * Ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return x;
}

LbfgsResult minimize_lbfgs(const std::function<Vec(const Vec&)>& grad, const Vec& start,
                           const LbfgsOptions& options) {
  LbfgsResult result;
  result.x = start;
  Vec g = grad(result.x);
  result.evaluations = 1;
  std::deque<std::pair<Vec, Vec>> memory;
  std::deque<double> rho;
  for (int k = 0; k < options.max_iter; ++k) {
    result.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
    if (result.gradient_norm <= options.tol) {
      result.converged = true;
      return result;
    }
    result.iterations = k + 1;

    // Two-loop recursion.
    Vec d = -g;
    std::vector<double> a(memory.size());
    for (std::size_t j = memory.size(); j-- > 0;) {
      a[j] = rho[j] * memory[j].first.dot(d);
      d -= a[j] * memory[j].second;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      d *= s.dot(y) / y.squaredNorm();
    } else {
      d /= std::max(1.0, result.gradient_norm);
    }
    for (std::size_t j = 0; j < memory.size(); ++j) {
      const double b = rho[j] * memory[j].second.dot(d);
      d += (a[j] - b) * memory[j].first;
    }
    double slope0 = g.dot(d);
    if (!(slope0 < 0.0)) {
      memory.clear();
      rho.clear();
      d = -g / std::max(1.0, result.gradient_norm);
      slope0 = g.dot(d);
    }

    // Accept t with -0.9 |phi'(0)| <= phi'(t) <= 0.5 |phi'(0)|.
    double lo = 0.0, hi = -1.0, slope_lo = slope0, slope_hi = 0.0;
    double t = 1.0;
    Vec g_t;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      g_t = grad(result.x + t * d);
      ++result.evaluations;
      const double slope = g_t.dot(d);
      if (slope >= 0.9 * slope0 && slope <= -0.5 * slope0) {
        accepted = true;
        break;
      }
      if (slope < 0.9 * slope0) {
        lo = t;
        slope_lo = slope;
      } else {
        hi = t;
        slope_hi = slope;
      }
      if (hi < 0.0) {
        t *= 4.0;
      } else {
        const double width = hi - lo;
        const double secant = lo - slope_lo * width / (slope_hi - slope_lo);
        t = std::clamp(secant, lo + 0.1 * width, hi - 0.1 * width);
      }
    }
    if (!accepted) {
      // The bracket collapsed at rounding level; keep the best point seen.
      if (g_t.lpNorm<Eigen::Infinity>() >= result.gradient_norm) return result;
    }
    Vec s = t * d;
    Vec y = g_t - g;
    result.x += s;
    g = std::move(g_t);
    const double sy = s.dot(y);
    if (sy > 1e-300 && sy > 1e-14 * s.norm() * y.norm()) {
      memory.emplace_back(std::move(s), std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(memory.size()) > options.memory) {
        memory.pop_front();
        rho.pop_front();
      }
    }
  }
  result.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  result.converged = result.gradient_norm <= options.tol;
  return result;
}

}  // namespace stackelberg::linalg
