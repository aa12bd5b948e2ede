#include "stackelberg/coupled_set.hpp"

#include <algorithm>
#include <limits>

namespace stackelberg {

CoupledSet::CoupledSet(const AggregativeGame& game, DykstraOptions options)
    : game_(&game), options_(options) {
  const Index n = game.n();
  const double inf = std::numeric_limits<double>::infinity();
  lo_ = Vec::Constant(n, -inf);
  hi_ = Vec::Constant(n, inf);
  bool all_box = true;
  std::vector<ConvexSetDescriptor> general_rows;
  for (Index i = 0; i < game.N(); ++i) {
    const auto& local = game.local(i);
    if (local.is_box()) {
      lo_.segment(game.offset(i), game.dim(i)) = local.box_lo();
      hi_.segment(game.offset(i), game.dim(i)) = local.box_hi();
      continue;
    }
    all_box = false;
    for (Index r = 0; r < local.rows(); ++r) {
      Vec a = Vec::Zero(n);
      a.segment(game.offset(i), game.dim(i)) = local.F().row(r).transpose();
      general_rows.emplace_back(Halfspace{std::move(a), local.g()[r]});
    }
  }

  const Mat& A = game.A();
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  bool disjoint = true;
  for (Index r = 0; r < A.rows(); ++r) {
    std::vector<Index> support;
    for (Index c = 0; c < n; ++c) {
      if (A(r, c) == 0.0) continue;
      support.push_back(c);
      if (owner[static_cast<std::size_t>(c)] >= 0) disjoint = false;
      owner[static_cast<std::size_t>(c)] = static_cast<int>(r);
    }
    supports_.push_back(std::move(support));
  }
  exact_ = all_box && disjoint;
  if (exact_) return;

  sets_.emplace_back(Box{lo_, hi_});
  for (auto& row : general_rows) sets_.push_back(std::move(row));
  for (Index r = 0; r < A.rows(); ++r) sets_.emplace_back(Halfspace{A.row(r).transpose(), game.b()[r]});
}

Vec CoupledSet::project(const Vec& v) const {
  if (!exact_) return dykstra(sets_, v, options_);
  Vec x = v.cwiseMax(lo_).cwiseMin(hi_);
  const Mat& A = game_->A();
  for (Index r = 0; r < A.rows(); ++r) {
    const auto& support = supports_[static_cast<std::size_t>(r)];
    const Index k = static_cast<Index>(support.size());
    Vec a(k), l(k), u(k), w(k);
    for (Index j = 0; j < k; ++j) {
      const Index c = support[static_cast<std::size_t>(j)];
      a[j] = A(r, c);
      l[j] = lo_[c];
      u[j] = hi_[c];
      w[j] = v[c];
    }
    Vec proj = project_box_halfspace(l, u, a, game_->b()[r], w);
    for (Index j = 0; j < k; ++j) x[support[static_cast<std::size_t>(j)]] = proj[j];
  }
  return x;
}

double CoupledSet::violation(const Vec& x) const {
  double worst = 0.0;
  if (game_->p() > 0) worst = std::max(worst, (game_->local_apply(x) - game_->g()).maxCoeff());
  if (game_->m() > 0) worst = std::max(worst, (game_->A() * x - game_->b()).maxCoeff());
  return worst;
}

}  // namespace stackelberg
