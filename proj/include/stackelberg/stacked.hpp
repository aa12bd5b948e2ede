#pragma once

// The relaxed complementarity program in stacked form.
//
// Decision vector omega = col(y0, x, {nu_i}, nu) with nu_i = col(lambda_i, mu_i)
// and nu = col(lambda, mu). The equality system A_omega omega = d has three row
// groups:
//   stationarity (n rows): Q x + C y0 + A^T lambda + F^T lambda_loc = -h
//   coupling     (m rows): A x + mu = b
//   local        (p rows): F_i x_i + mu_i = g_i
// and splits column-wise into A_l (leader), A_f (followers, acting on
// y = col(x, {nu_i})) and A_c (coordinator, acting on nu).

#include <memory>
#include <vector>

#include "stackelberg/game.hpp"

namespace stackelberg {

class OmegaLayout {
 public:
  explicit OmegaLayout(const AggregativeGame& game);

  Index n0() const { return n0_; }
  Index n() const { return n_; }
  Index m() const { return m_; }
  Index p() const { return p_; }
  Index N() const { return static_cast<Index>(local_rows_.size()); }
  Index size() const { return n0_ + n_ + 2 * (p_ + m_); }
  Index rows() const { return n_ + m_ + p_; }

  Index x_offset() const { return n0_; }
  Index y_offset() const { return n0_; }
  Index y_size() const { return n_ + 2 * p_; }
  Index nu_local_offset(Index i) const { return n0_ + n_ + 2 * local_offsets_[static_cast<std::size_t>(i)]; }
  Index local_rows(Index i) const { return local_rows_[static_cast<std::size_t>(i)]; }
  Index local_offset(Index i) const { return local_offsets_[static_cast<std::size_t>(i)]; }
  Index nu_offset() const { return n0_ + n_ + 2 * p_; }
  Index phi_size() const { return n0_ + n_; }

 private:
  Index n0_ = 0;
  Index n_ = 0;
  Index m_ = 0;
  Index p_ = 0;
  std::vector<Index> local_rows_;
  std::vector<Index> local_offsets_;
};

// omega with named views. Copies share the (immutable) layout.
struct OmegaPoint {
  std::shared_ptr<const OmegaLayout> layout;
  Vec data;

  OmegaPoint() = default;
  explicit OmegaPoint(std::shared_ptr<const OmegaLayout> l)
      : layout(std::move(l)), data(Vec::Zero(layout->size())) {}
  OmegaPoint(std::shared_ptr<const OmegaLayout> l, Vec values);

  auto y0() { return data.head(layout->n0()); }
  auto y0() const { return data.head(layout->n0()); }
  auto x() { return data.segment(layout->x_offset(), layout->n()); }
  auto x() const { return data.segment(layout->x_offset(), layout->n()); }
  auto phi() const { return data.head(layout->phi_size()); }
  auto y() { return data.segment(layout->y_offset(), layout->y_size()); }
  auto y() const { return data.segment(layout->y_offset(), layout->y_size()); }
  auto nu_local(Index i) { return data.segment(layout->nu_local_offset(i), 2 * layout->local_rows(i)); }
  auto nu_local(Index i) const { return data.segment(layout->nu_local_offset(i), 2 * layout->local_rows(i)); }
  auto lambda_local(Index i) { return data.segment(layout->nu_local_offset(i), layout->local_rows(i)); }
  auto lambda_local(Index i) const { return data.segment(layout->nu_local_offset(i), layout->local_rows(i)); }
  auto mu_local(Index i) {
    return data.segment(layout->nu_local_offset(i) + layout->local_rows(i), layout->local_rows(i));
  }
  auto mu_local(Index i) const {
    return data.segment(layout->nu_local_offset(i) + layout->local_rows(i), layout->local_rows(i));
  }
  auto nu() { return data.tail(2 * layout->m()); }
  auto nu() const { return data.tail(2 * layout->m()); }
  auto lambda() { return data.segment(layout->nu_offset(), layout->m()); }
  auto lambda() const { return data.segment(layout->nu_offset(), layout->m()); }
  auto mu() { return data.tail(layout->m()); }
  auto mu() const { return data.tail(layout->m()); }

  // All local multipliers stacked (length p), in follower order.
  Vec lambda_local_stacked() const;
  Vec mu_local_stacked() const;
};

struct RelaxationParams {
  double theta = 1e-2;
  Vec theta_i;  // one per follower

  static RelaxationParams uniform(double theta, Index followers);
  // Throws PreconditionError unless every parameter is strictly positive.
  void validate(Index followers) const;
};

// Symmetric matrix with identities on the anti-diagonal, so that
// 0.5 nu^T P nu = lambda^T mu for nu = col(lambda, mu).
Mat antidiagonal_identity(Index half);

class StackedSystem {
 public:
  explicit StackedSystem(std::shared_ptr<const AggregativeGame> game);

  const AggregativeGame& game() const { return *game_; }
  std::shared_ptr<const AggregativeGame> game_ptr() const { return game_; }
  const std::shared_ptr<const OmegaLayout>& layout() const { return layout_; }
  Index size() const { return layout_->size(); }
  Index rows() const { return layout_->rows(); }
  const Vec& d() const { return d_; }

  // Column blocks of A_omega and their transposes.
  Vec leader_apply(const Eigen::Ref<const Vec>& y0) const;
  Vec leader_apply_transpose(const Eigen::Ref<const Vec>& r) const;
  Vec followers_apply(const Eigen::Ref<const Vec>& y) const;
  Vec followers_apply_transpose(const Eigen::Ref<const Vec>& r) const;
  Vec coordinator_apply(const Eigen::Ref<const Vec>& nu) const;
  Vec coordinator_apply_transpose(const Eigen::Ref<const Vec>& r) const;

  // Per-follower column block of A_f acting on col(x_i, nu_i).
  Vec follower_apply(Index i, const Eigen::Ref<const Vec>& xi, const Eigen::Ref<const Vec>& nui) const;

  Vec apply(const Vec& omega) const;
  Vec apply_transpose(const Vec& r) const;
  Vec residual(const OmegaPoint& w) const { return apply(w.data) - d_; }

  // Squared spectral norms (estimates, padded upward) of A_l, A_f, A_c, A_omega.
  double leader_norm_sq() const { return leader_norm_sq_; }
  double followers_norm_sq() const { return followers_norm_sq_; }
  double coordinator_norm_sq() const { return coordinator_norm_sq_; }
  double norm_sq() const { return norm_sq_; }

  // Explicit matrices, for checks on small instances.
  Mat dense_leader() const;
  Mat dense_followers() const;
  Mat dense_coordinator() const;
  Mat dense() const;

 private:
  std::shared_ptr<const AggregativeGame> game_;
  std::shared_ptr<const OmegaLayout> layout_;
  Vec d_;
  double leader_norm_sq_ = 0.0;
  double followers_norm_sq_ = 0.0;
  double coordinator_norm_sq_ = 0.0;
  double norm_sq_ = 0.0;
};

struct ResidualReport {
  double equality = 0.0;           // ||A_omega omega - d||_inf
  double bound_violation = 0.0;    // most negative multiplier / slack, as a positive number
  double complementarity = 0.0;    // lambda^T mu
  double local_complementarity = 0.0;  // max_i lambda_i^T mu_i
  double complementarity_excess = 0.0;        // max(lambda^T mu - theta, 0)
  double local_complementarity_excess = 0.0;  // max_i max(lambda_i^T mu_i - theta_i, 0)
  double leader_violation = 0.0;   // distance-type violation of y0 in Y0

  bool feasible(double tol) const {
    return equality <= tol && bound_violation <= tol && complementarity_excess <= tol &&
           local_complementarity_excess <= tol && leader_violation <= tol;
  }
};

// Membership report for the relaxed feasible set R(theta).
ResidualReport residuals(const StackedSystem& sys, const RelaxationParams& params, const OmegaPoint& w);

}  // namespace stackelberg
