#pragma once

// Aggregative single-leader / multi-follower game data and its cost model.
//
// Follower i minimises over x_i in { F_i x_i <= g_i }, subject to the shared
// constraint sum_j A_j x_j <= b,
//
//   J_i = 0.5 x_i^T (Q_i + C_ii / N) x_i
//         + ( (1/N) sum_{j != i} C_ij x_j + C_i0 y0 + h_i )^T x_i,
//
// so that the stacked pseudo-gradient is H(y0, x) = Q x + C y0 + h with the
// diagonal blocks of Q equal to Q_i + C_ii / N (C_ii must be symmetric).
//
// The leader minimises
//
//   J_0 = r0^T y0 + 0.5 y0^T R0 y0 + ( sum_i S_i x_i + t_i )^T y0
//
// over the box Y0 = [lo, hi], optionally cut by G0 y0 <= h0. A custom smooth
// J_0 may be supplied instead, together with its gradient Lipschitz constant.

#include <functional>
#include <optional>
#include <vector>

#include "stackelberg/types.hpp"

namespace stackelberg {

struct Tolerances {
  double psd = 1e-10;
  double rank = 1e-10;
};

// Row i of the interaction blocks C_{i,j}, j = 0..N-1. Stored either as N dense
// blocks or, when every off-diagonal block is identical, as a (self, other) pair.
class InteractionRow {
 public:
  InteractionRow() = default;
  static InteractionRow full(std::vector<Mat> blocks, Index self);
  static InteractionRow uniform(Mat self_block, Mat other_block, Index count, Index self);
  // Collapses to the uniform form when all off-diagonal blocks coincide.
  static InteractionRow compact(std::vector<Mat> blocks, Index self);

  Index size() const { return count_; }
  Index self_index() const { return self_; }
  bool is_uniform() const { return uniform_; }
  const Mat& block(Index j) const;
  const Mat& self_block() const { return block(self_); }
  // Only meaningful for the uniform form.
  const Mat& other_block() const { return other_; }

 private:
  std::vector<Mat> blocks_;
  Mat self_block_;
  Mat other_;
  Index count_ = 0;
  Index self_ = 0;
  bool uniform_ = false;
};

struct FollowerData {
  Mat Q;
  InteractionRow C;
  Mat C0;
  Mat F;
  Vec g;
  Mat A;
  Vec h;  // linear cost term; empty means zero

  Index dim() const { return Q.rows(); }
  Index local_rows() const { return F.rows(); }
};

struct CustomLeaderCost {
  std::function<double(const Vec& y0, const Vec& x)> cost;
  std::function<Vec(const Vec& y0, const Vec& x)> gradient;  // length n0 + n
  double kappa0 = 0.0;
};

struct LeaderData {
  Index n0 = 0;
  Vec lo;
  Vec hi;
  Mat G0;  // optional polyhedral cut, zero rows when absent
  Vec h0;
  Mat R0;
  Vec r0;
  std::vector<Mat> S;  // n0 x n_i per follower
  std::vector<Vec> t;  // n0 per follower
  std::optional<CustomLeaderCost> custom;
};

// F_i with a fast path for rows that have a single nonzero (bounds on one
// coordinate), which covers box-constrained followers.
class LocalConstraints {
 public:
  LocalConstraints() = default;
  LocalConstraints(Mat F, Vec g);

  Vec apply(const Eigen::Ref<const Vec>& x) const;
  Vec apply_transpose(const Eigen::Ref<const Vec>& lambda) const;
  const Mat& F() const { return F_; }
  const Vec& g() const { return g_; }
  Index rows() const { return F_.rows(); }
  Index cols() const { return F_.cols(); }
  // True when every row bounds a single coordinate; box_lo / box_hi then
  // describe the set exactly (with infinite entries for missing sides).
  bool is_box() const { return single_entry_; }
  const Vec& box_lo() const { return box_lo_; }
  const Vec& box_hi() const { return box_hi_; }

 private:
  Mat F_;
  Vec g_;
  bool single_entry_ = false;
  std::vector<Index> column_;
  Vec coefficient_;
  Vec box_lo_;
  Vec box_hi_;
};

// The stacked pseudo-gradient matrix Q as a linear operator. Dense unless every
// follower's interaction row is uniform with equal block sizes, in which case
// products cost O(N n_i^2).
class PseudoGradientOperator {
 public:
  PseudoGradientOperator() = default;
  PseudoGradientOperator(const std::vector<FollowerData>& followers, const std::vector<Index>& offsets);

  Vec apply(const Eigen::Ref<const Vec>& x) const;
  Vec apply_transpose(const Eigen::Ref<const Vec>& v) const;
  Mat dense() const;
  bool structured() const { return structured_; }
  Index size() const { return n_; }

 private:
  Index n_ = 0;
  bool structured_ = false;
  Mat dense_;
  std::vector<Mat> diagonal_;  // Q_i + C_ii / N
  std::vector<Mat> other_;     // C_i,other / N
  Index block_ = 0;
};

class AggregativeGame {
 public:
  AggregativeGame(LeaderData leader, std::vector<FollowerData> followers, Vec b,
                  Tolerances tolerances = {});

  const LeaderData& leader() const { return leader_; }
  const std::vector<FollowerData>& followers() const { return followers_; }
  const FollowerData& follower(Index i) const { return followers_[static_cast<std::size_t>(i)]; }
  const LocalConstraints& local(Index i) const { return local_[static_cast<std::size_t>(i)]; }
  const Vec& b() const { return b_; }
  const Tolerances& tolerances() const { return tolerances_; }

  Index N() const { return static_cast<Index>(followers_.size()); }
  Index n0() const { return leader_.n0; }
  Index n() const { return n_; }
  Index m() const { return b_.size(); }
  Index p() const { return p_; }
  Index dim(Index i) const { return follower(i).dim(); }
  Index offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
  Index local_offset(Index i) const { return local_offsets_[static_cast<std::size_t>(i)]; }

  const PseudoGradientOperator& Q() const { return Q_; }
  const Mat& C() const { return C_; }  // n x n0
  const Mat& A() const { return A_; }  // m x n
  const Vec& h() const { return h_; }  // n
  const Vec& g() const { return g_; }  // p

  Vec local_apply(const Eigen::Ref<const Vec>& x) const;             // F x
  Vec local_apply_transpose(const Eigen::Ref<const Vec>& lam) const;  // F^T lambda_loc

  // H(y0, x) = Q x + C y0 + h.
  Vec pseudo_gradient(const Vec& y0, const Vec& x) const;
  double follower_cost(Index i, const Vec& y0, const Vec& x) const;
  double leader_cost(const Vec& y0, const Vec& x) const;
  // col(grad_y0 J0, grad_x J0).
  Vec leader_grad(const Vec& y0, const Vec& x) const;
  bool has_quadratic_leader() const { return !leader_.custom.has_value(); }

  // Result of the Q + Q^T >= -tol check done at construction; empty when the
  // game is too large for the dense factorisation.
  std::optional<bool> monotone() const { return monotone_; }

  Vec y0_midpoint() const;

 private:
  LeaderData leader_;
  std::vector<FollowerData> followers_;
  std::vector<LocalConstraints> local_;
  Vec b_;
  Tolerances tolerances_;
  Index n_ = 0;
  Index p_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> local_offsets_;
  PseudoGradientOperator Q_;
  Mat C_;
  Mat A_;
  Vec h_;
  Vec g_;
  std::optional<bool> monotone_;
};

// Dense stacked (Q, C).
struct PseudoGradientBlocks {
  Mat Q;
  Mat C;
};
PseudoGradientBlocks assemble_pseudo_gradient(const AggregativeGame& game);

// Spectral norm of the constant Hessian of J_0 in (y0, x). Throws
// UnsupportedFormError for a custom leader cost.
double estimate_kappa0(const AggregativeGame& game);

// Lipschitz constant of grad J_0: estimate_kappa0 for the quadratic family,
// the user-supplied value otherwise.
double leader_lipschitz(const AggregativeGame& game);

struct GameDiagnostics {
  bool follower_q_psd = true;
  bool local_full_row_rank = true;
  bool local_nonempty = true;
  bool local_bounded = true;
  bool leader_set_nonempty = true;
  bool coupled_set_nonempty = true;
  std::optional<bool> monotone;
  std::vector<std::string> messages;

  bool ok() const {
    return follower_q_psd && local_nonempty && local_bounded && leader_set_nonempty &&
           coupled_set_nonempty && monotone.value_or(true);
  }
};

// Checks the standing assumptions that are not enforced at construction. Full
// row rank of F_i is reported but does not make ok() false: bound pairs on the
// same coordinate violate it while describing a perfectly valid box.
GameDiagnostics diagnose(const AggregativeGame& game);

}  // namespace stackelberg
