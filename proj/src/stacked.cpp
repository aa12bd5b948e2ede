#include "stackelberg/stacked.hpp"

#include <algorithm>
#include <cmath>

#include "stackelberg/linalg.hpp"

namespace stackelberg {
namespace {

// Padded power-iteration estimate of ||B||^2 for B given by its products.
template <typename Apply, typename ApplyT>
double norm_sq_estimate(Apply apply, ApplyT apply_t, Index cols) {
  if (cols == 0) return 0.0;
  auto gram = [&](const Vec& v) { return Vec(apply_t(apply(v))); };
  return 1.05 * linalg::power_iteration(gram, cols, 300);
}

}  // namespace

OmegaLayout::OmegaLayout(const AggregativeGame& game)
    : n0_(game.n0()), n_(game.n()), m_(game.m()), p_(game.p()) {
  for (Index i = 0; i < game.N(); ++i) {
    local_rows_.push_back(game.local(i).rows());
    local_offsets_.push_back(game.local_offset(i));
  }
}

OmegaPoint::OmegaPoint(std::shared_ptr<const OmegaLayout> l, Vec values)
    : layout(std::move(l)), data(std::move(values)) {
  if (data.size() != layout->size()) {
    throw StructuralError("omega has length " + std::to_string(data.size()) + ", expected " +
                          std::to_string(layout->size()));
  }
}

Vec OmegaPoint::lambda_local_stacked() const {
  Vec out(layout->p());
  for (Index i = 0; i < layout->N(); ++i) out.segment(layout->local_offset(i), layout->local_rows(i)) = lambda_local(i);
  return out;
}

Vec OmegaPoint::mu_local_stacked() const {
  Vec out(layout->p());
  for (Index i = 0; i < layout->N(); ++i) out.segment(layout->local_offset(i), layout->local_rows(i)) = mu_local(i);
  return out;
}

RelaxationParams RelaxationParams::uniform(double theta, Index followers) {
  return {theta, Vec::Constant(followers, theta)};
}

void RelaxationParams::validate(Index followers) const {
  if (!(theta > 0.0)) throw PreconditionError("theta must be positive");
  if (theta_i.size() != followers) throw PreconditionError("theta_i needs one entry per follower");
  if (followers > 0 && !(theta_i.minCoeff() > 0.0)) throw PreconditionError("every theta_i must be positive");
}

Mat antidiagonal_identity(Index half) {
  Mat P = Mat::Zero(2 * half, 2 * half);
  P.topRightCorner(half, half).setIdentity();
  P.bottomLeftCorner(half, half).setIdentity();
  return P;
}

StackedSystem::StackedSystem(std::shared_ptr<const AggregativeGame> game)
    : game_(std::move(game)), layout_(std::make_shared<const OmegaLayout>(*game_)) {
  const auto& g = *game_;
  d_.resize(rows());
  d_ << -g.h(), g.b(), g.g();

  leader_norm_sq_ = norm_sq_estimate([&](const Vec& v) { return leader_apply(v); },
                                     [&](const Vec& r) { return leader_apply_transpose(r); }, g.n0());
  followers_norm_sq_ = norm_sq_estimate([&](const Vec& v) { return followers_apply(v); },
                                        [&](const Vec& r) { return followers_apply_transpose(r); },
                                        layout_->y_size());
  coordinator_norm_sq_ = norm_sq_estimate([&](const Vec& v) { return coordinator_apply(v); },
                                          [&](const Vec& r) { return coordinator_apply_transpose(r); }, 2 * g.m());
  norm_sq_ = norm_sq_estimate([&](const Vec& v) { return apply(v); },
                              [&](const Vec& r) { return apply_transpose(r); }, size());
}

Vec StackedSystem::leader_apply(const Eigen::Ref<const Vec>& y0) const {
  Vec out = Vec::Zero(rows());
  out.head(game_->n()).noalias() = game_->C() * y0;
  return out;
}

Vec StackedSystem::leader_apply_transpose(const Eigen::Ref<const Vec>& r) const {
  return game_->C().transpose() * r.head(game_->n());
}

Vec StackedSystem::followers_apply(const Eigen::Ref<const Vec>& y) const {
  const auto& g = *game_;
  const Index n = g.n();
  const Index m = g.m();
  const auto x = y.head(n);
  Vec lam(g.p()), mu(g.p());
  for (Index i = 0; i < g.N(); ++i) {
    const Index off = 2 * g.local_offset(i);
    const Index pi = g.local(i).rows();
    lam.segment(g.local_offset(i), pi) = y.segment(n + off, pi);
    mu.segment(g.local_offset(i), pi) = y.segment(n + off + pi, pi);
  }
  Vec out(rows());
  out.head(n) = g.Q().apply(x) + g.local_apply_transpose(lam);
  out.segment(n, m).noalias() = g.A() * x;
  out.tail(g.p()) = g.local_apply(x) + mu;
  return out;
}

Vec StackedSystem::followers_apply_transpose(const Eigen::Ref<const Vec>& r) const {
  const auto& g = *game_;
  const Index n = g.n();
  const Index m = g.m();
  const auto r1 = r.head(n);
  const auto r2 = r.segment(n, m);
  const auto r3 = r.tail(g.p());
  Vec out(layout_->y_size());
  out.head(n) = g.Q().apply_transpose(r1) + g.local_apply_transpose(r3);
  if (m > 0) out.head(n).noalias() += g.A().transpose() * r2;
  const Vec lam = g.local_apply(r1);
  for (Index i = 0; i < g.N(); ++i) {
    const Index off = 2 * g.local_offset(i);
    const Index pi = g.local(i).rows();
    out.segment(n + off, pi) = lam.segment(g.local_offset(i), pi);
    out.segment(n + off + pi, pi) = r3.segment(g.local_offset(i), pi);
  }
  return out;
}

Vec StackedSystem::follower_apply(Index i, const Eigen::Ref<const Vec>& xi, const Eigen::Ref<const Vec>& nui) const {
  Vec y = Vec::Zero(layout_->y_size());
  y.segment(game_->offset(i), game_->dim(i)) = xi;
  y.segment(game_->n() + 2 * game_->local_offset(i), nui.size()) = nui;
  return followers_apply(y);
}

Vec StackedSystem::coordinator_apply(const Eigen::Ref<const Vec>& nu) const {
  const Index n = game_->n();
  const Index m = game_->m();
  Vec out = Vec::Zero(rows());
  out.head(n).noalias() = game_->A().transpose() * nu.head(m);
  out.segment(n, m) = nu.tail(m);
  return out;
}

Vec StackedSystem::coordinator_apply_transpose(const Eigen::Ref<const Vec>& r) const {
  const Index n = game_->n();
  const Index m = game_->m();
  Vec out(2 * m);
  out.head(m).noalias() = game_->A() * r.head(n);
  out.tail(m) = r.segment(n, m);
  return out;
}

Vec StackedSystem::apply(const Vec& omega) const {
  const auto& l = *layout_;
  return leader_apply(omega.head(l.n0())) + followers_apply(omega.segment(l.y_offset(), l.y_size())) +
         coordinator_apply(omega.tail(2 * l.m()));
}

Vec StackedSystem::apply_transpose(const Vec& r) const {
  const auto& l = *layout_;
  Vec out(size());
  out.head(l.n0()) = leader_apply_transpose(r);
  out.segment(l.y_offset(), l.y_size()) = followers_apply_transpose(r);
  out.tail(2 * l.m()) = coordinator_apply_transpose(r);
  return out;
}

Mat StackedSystem::dense_leader() const {
  Mat out = Mat::Zero(rows(), game_->n0());
  out.topRows(game_->n()) = game_->C();
  return out;
}

Mat StackedSystem::dense_followers() const {
  const Index cols = layout_->y_size();
  Mat out(rows(), cols);
  Vec e = Vec::Zero(cols);
  for (Index c = 0; c < cols; ++c) {
    e[c] = 1.0;
    out.col(c) = followers_apply(e);
    e[c] = 0.0;
  }
  return out;
}

Mat StackedSystem::dense_coordinator() const {
  const Index n = game_->n();
  const Index m = game_->m();
  Mat out = Mat::Zero(rows(), 2 * m);
  out.block(0, 0, n, m) = game_->A().transpose();
  out.block(n, m, m, m).setIdentity();
  return out;
}

Mat StackedSystem::dense() const {
  Mat out(rows(), size());
  out << dense_leader(), dense_followers(), dense_coordinator();
  return out;
}

ResidualReport residuals(const StackedSystem& sys, const RelaxationParams& params, const OmegaPoint& w) {
  const auto& game = sys.game();
  const auto& layout = *sys.layout();
  if (w.data.size() != layout.size()) throw StructuralError("omega length does not match the stacked system");
  ResidualReport r;
  r.equality = layout.rows() > 0 ? sys.residual(w).lpNorm<Eigen::Infinity>() : 0.0;

  const Index dual_size = layout.size() - layout.phi_size();
  if (dual_size > 0) r.bound_violation = std::max(0.0, -w.data.tail(dual_size).minCoeff());

  r.complementarity = w.lambda().dot(w.mu());
  r.complementarity_excess = std::max(0.0, r.complementarity - params.theta);
  for (Index i = 0; i < layout.N(); ++i) {
    const double ci = w.lambda_local(i).dot(w.mu_local(i));
    r.local_complementarity = std::max(r.local_complementarity, ci);
    const double ti = params.theta_i.size() == layout.N() ? params.theta_i[i] : params.theta;
    r.local_complementarity_excess = std::max(r.local_complementarity_excess, ci - ti);
  }

  const auto& leader = game.leader();
  const auto y0 = w.y0();
  for (Index k = 0; k < layout.n0(); ++k) {
    r.leader_violation = std::max({r.leader_violation, leader.lo[k] - y0[k], y0[k] - leader.hi[k]});
  }
  if (leader.G0.rows() > 0) {
    r.leader_violation = std::max(r.leader_violation, (leader.G0 * y0 - leader.h0).maxCoeff());
  }
  return r;
}

}  // namespace stackelberg
