#include "stackelberg/game.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stackelberg/coupled_set.hpp"
#include "stackelberg/linalg.hpp"
#include "stackelberg/projections.hpp"

namespace stackelberg {
namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void structural(Index follower, const std::string& what) {
  throw StructuralError("follower " + std::to_string(follower) + ": " + what);
}

constexpr Index kDenseCheckLimit = 4000;

}  // namespace

// ---------------------------------------------------------------------------
// InteractionRow

InteractionRow InteractionRow::full(std::vector<Mat> blocks, Index self) {
  InteractionRow row;
  row.count_ = static_cast<Index>(blocks.size());
  row.self_ = self;
  row.blocks_ = std::move(blocks);
  return row;
}

InteractionRow InteractionRow::uniform(Mat self_block, Mat other_block, Index count, Index self) {
  InteractionRow row;
  row.count_ = count;
  row.self_ = self;
  row.uniform_ = true;
  row.self_block_ = std::move(self_block);
  row.other_ = std::move(other_block);
  return row;
}

InteractionRow InteractionRow::compact(std::vector<Mat> blocks, Index self) {
  const Index count = static_cast<Index>(blocks.size());
  if (count >= 2) {
    const Index first_other = self == 0 ? 1 : 0;
    const Mat& other = blocks[static_cast<std::size_t>(first_other)];
    bool same = true;
    for (Index j = 0; j < count && same; ++j) {
      if (j == self) continue;
      const Mat& bj = blocks[static_cast<std::size_t>(j)];
      same = bj.rows() == other.rows() && bj.cols() == other.cols() && bj == other;
    }
    if (same && self < count) {
      Mat self_block = blocks[static_cast<std::size_t>(self)];
      return uniform(std::move(self_block), other, count, self);
    }
  }
  return full(std::move(blocks), self);
}

const Mat& InteractionRow::block(Index j) const {
  if (!uniform_) return blocks_[static_cast<std::size_t>(j)];
  return j == self_ ? self_block_ : other_;
}

// ---------------------------------------------------------------------------
// LocalConstraints

LocalConstraints::LocalConstraints(Mat F, Vec g) : F_(std::move(F)), g_(std::move(g)) {
  const Index cols = F_.cols();
  single_entry_ = true;
  column_.assign(static_cast<std::size_t>(F_.rows()), 0);
  coefficient_ = Vec::Zero(F_.rows());
  box_lo_ = Vec::Constant(cols, -std::numeric_limits<double>::infinity());
  box_hi_ = Vec::Constant(cols, std::numeric_limits<double>::infinity());
  for (Index r = 0; r < F_.rows() && single_entry_; ++r) {
    Index nonzeros = 0;
    for (Index c = 0; c < cols; ++c) {
      if (F_(r, c) != 0.0) {
        ++nonzeros;
        column_[static_cast<std::size_t>(r)] = c;
        coefficient_[r] = F_(r, c);
      }
    }
    if (nonzeros != 1) {
      single_entry_ = false;
      break;
    }
    const Index c = column_[static_cast<std::size_t>(r)];
    const double bound = g_[r] / coefficient_[r];
    if (coefficient_[r] > 0.0) {
      box_hi_[c] = std::min(box_hi_[c], bound);
    } else {
      box_lo_[c] = std::max(box_lo_[c], bound);
    }
  }
}

Vec LocalConstraints::apply(const Eigen::Ref<const Vec>& x) const {
  if (!single_entry_) return F_ * x;
  Vec out(F_.rows());
  for (Index r = 0; r < F_.rows(); ++r) out[r] = coefficient_[r] * x[column_[static_cast<std::size_t>(r)]];
  return out;
}

Vec LocalConstraints::apply_transpose(const Eigen::Ref<const Vec>& lambda) const {
  if (!single_entry_) return F_.transpose() * lambda;
  Vec out = Vec::Zero(F_.cols());
  for (Index r = 0; r < F_.rows(); ++r) out[column_[static_cast<std::size_t>(r)]] += coefficient_[r] * lambda[r];
  return out;
}

// ---------------------------------------------------------------------------
// PseudoGradientOperator

PseudoGradientOperator::PseudoGradientOperator(const std::vector<FollowerData>& followers,
                                               const std::vector<Index>& offsets) {
  const Index N = static_cast<Index>(followers.size());
  n_ = 0;
  for (const auto& f : followers) n_ += f.dim();
  const double inv_n = 1.0 / static_cast<double>(N);

  structured_ = N > 1;
  for (const auto& f : followers) {
    structured_ = structured_ && f.C.is_uniform() && f.dim() == followers.front().dim();
  }
  if (structured_) {
    block_ = followers.front().dim();
    for (const auto& f : followers) {
      diagonal_.push_back(f.Q + inv_n * f.C.self_block());
      other_.push_back(inv_n * f.C.other_block());
    }
    return;
  }
  dense_ = Mat::Zero(n_, n_);
  for (Index i = 0; i < N; ++i) {
    const auto& f = followers[static_cast<std::size_t>(i)];
    const Index oi = offsets[static_cast<std::size_t>(i)];
    for (Index j = 0; j < N; ++j) {
      const Index oj = offsets[static_cast<std::size_t>(j)];
      dense_.block(oi, oj, f.dim(), followers[static_cast<std::size_t>(j)].dim()) = inv_n * f.C.block(j);
    }
    dense_.block(oi, oi, f.dim(), f.dim()) += f.Q;
  }
}

Vec PseudoGradientOperator::apply(const Eigen::Ref<const Vec>& x) const {
  if (!structured_) return dense_ * x;
  const Index N = static_cast<Index>(diagonal_.size());
  Vec total = Vec::Zero(block_);
  for (Index i = 0; i < N; ++i) total += x.segment(i * block_, block_);
  Vec out(n_);
  for (Index i = 0; i < N; ++i) {
    const auto xi = x.segment(i * block_, block_);
    out.segment(i * block_, block_).noalias() =
        diagonal_[static_cast<std::size_t>(i)] * xi + other_[static_cast<std::size_t>(i)] * (total - xi);
  }
  return out;
}

Vec PseudoGradientOperator::apply_transpose(const Eigen::Ref<const Vec>& v) const {
  if (!structured_) return dense_.transpose() * v;
  const Index N = static_cast<Index>(diagonal_.size());
  Vec spread = Vec::Zero(block_);
  for (Index i = 0; i < N; ++i) {
    spread.noalias() += other_[static_cast<std::size_t>(i)].transpose() * v.segment(i * block_, block_);
  }
  Vec out(n_);
  for (Index j = 0; j < N; ++j) {
    const auto vj = v.segment(j * block_, block_);
    const auto& d = diagonal_[static_cast<std::size_t>(j)];
    const auto& o = other_[static_cast<std::size_t>(j)];
    out.segment(j * block_, block_).noalias() = d.transpose() * vj + spread - o.transpose() * vj;
  }
  return out;
}

Mat PseudoGradientOperator::dense() const {
  if (!structured_) return dense_;
  const Index N = static_cast<Index>(diagonal_.size());
  Mat out(n_, n_);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < N; ++j) {
      out.block(i * block_, j * block_, block_, block_) =
          i == j ? diagonal_[static_cast<std::size_t>(i)] : other_[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// AggregativeGame

AggregativeGame::AggregativeGame(LeaderData leader, std::vector<FollowerData> followers, Vec b,
                                 Tolerances tolerances)
    : leader_(std::move(leader)),
      followers_(std::move(followers)),
      b_(std::move(b)),
      tolerances_(tolerances) {
  const Index N = static_cast<Index>(followers_.size());
  if (N == 0) throw StructuralError("game needs at least one follower");
  const Index n0 = leader_.n0;
  if (n0 < 0) throw StructuralError("leader dimension must be nonnegative");
  const Index m = b_.size();

  n_ = 0;
  p_ = 0;
  for (Index i = 0; i < N; ++i) {
    offsets_.push_back(n_);
    local_offsets_.push_back(p_);
    n_ += followers_[static_cast<std::size_t>(i)].dim();
    p_ += followers_[static_cast<std::size_t>(i)].local_rows();
  }

  for (Index i = 0; i < N; ++i) {
    auto& f = followers_[static_cast<std::size_t>(i)];
    const Index ni = f.dim();
    if (f.Q.cols() != ni) structural(i, "Q must be square, got " + shape(f.Q));
    if ((f.Q - f.Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + f.Q.lpNorm<Eigen::Infinity>())) {
      structural(i, "Q must be symmetric");
    }
    if (f.C.size() != N) {
      structural(i, "C_row has " + std::to_string(f.C.size()) + " blocks, expected " + std::to_string(N));
    }
    if (f.C.self_index() != i) structural(i, "C_row self index mismatch");
    for (Index j = 0; j < N; ++j) {
      const Mat& blk = f.C.block(j);
      if (blk.rows() != ni || blk.cols() != followers_[static_cast<std::size_t>(j)].dim()) {
        structural(i, "C_row block " + std::to_string(j) + " has shape " + shape(blk));
      }
    }
    const Mat& self = f.C.self_block();
    if ((self - self.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + self.lpNorm<Eigen::Infinity>())) {
      structural(i, "self-interaction block C_ii must be symmetric");
    }
    if (f.C0.rows() != ni || f.C0.cols() != n0) structural(i, "C0 has shape " + shape(f.C0));
    if (f.F.cols() != ni) structural(i, "F has shape " + shape(f.F));
    if (f.g.size() != f.F.rows()) structural(i, "g length does not match F rows");
    if (f.A.rows() != m || f.A.cols() != ni) {
      structural(i, "A has shape " + shape(f.A) + ", expected " + std::to_string(m) + "x" + std::to_string(ni));
    }
    if (f.h.size() == 0) f.h = Vec::Zero(ni);
    if (f.h.size() != ni) structural(i, "h length mismatch");
  }

  auto leader_error = [](const std::string& what) { throw StructuralError("leader: " + what); };
  if (leader_.lo.size() != n0 || leader_.hi.size() != n0) leader_error("Y0 bounds must have length n0");
  if (leader_.G0.rows() == 0) {
    leader_.G0 = Mat::Zero(0, n0);
    leader_.h0 = Vec::Zero(0);
  }
  if (leader_.G0.cols() != n0 || leader_.h0.size() != leader_.G0.rows()) leader_error("G0/h0 shape mismatch");
  if (leader_.R0.size() == 0) leader_.R0 = Mat::Zero(n0, n0);
  if (leader_.R0.rows() != n0 || leader_.R0.cols() != n0) leader_error("R0 has shape " + shape(leader_.R0));
  if (leader_.r0.size() == 0) leader_.r0 = Vec::Zero(n0);
  if (leader_.r0.size() != n0) leader_error("r0 length mismatch");
  if (leader_.S.empty()) {
    for (const auto& f : followers_) leader_.S.push_back(Mat::Zero(n0, f.dim()));
  }
  if (leader_.t.empty()) leader_.t.assign(static_cast<std::size_t>(N), Vec::Zero(n0));
  if (static_cast<Index>(leader_.S.size()) != N || static_cast<Index>(leader_.t.size()) != N) {
    leader_error("S and t need one entry per follower");
  }
  for (Index i = 0; i < N; ++i) {
    const Mat& Si = leader_.S[static_cast<std::size_t>(i)];
    if (Si.rows() != n0 || Si.cols() != followers_[static_cast<std::size_t>(i)].dim()) {
      leader_error("S[" + std::to_string(i) + "] has shape " + shape(Si));
    }
    if (leader_.t[static_cast<std::size_t>(i)].size() != n0) leader_error("t[" + std::to_string(i) + "] length");
  }

  for (const auto& f : followers_) local_.emplace_back(f.F, f.g);
  Q_ = PseudoGradientOperator(followers_, offsets_);
  C_ = Mat::Zero(n_, n0);
  A_ = Mat::Zero(m, n_);
  h_ = Vec::Zero(n_);
  g_ = Vec::Zero(p_);
  for (Index i = 0; i < N; ++i) {
    const auto& f = followers_[static_cast<std::size_t>(i)];
    C_.middleRows(offset(i), f.dim()) = f.C0;
    A_.middleCols(offset(i), f.dim()) = f.A;
    h_.segment(offset(i), f.dim()) = f.h;
    g_.segment(local_offset(i), f.local_rows()) = f.g;
  }

  if (n_ <= kDenseCheckLimit) {
    const Mat Qd = Q_.dense();
    Mat sym = 0.5 * (Qd + Qd.transpose());
    sym.diagonal().array() += tolerances_.psd;
    monotone_ = sym.llt().info() == Eigen::Success;
  }
}

Vec AggregativeGame::local_apply(const Eigen::Ref<const Vec>& x) const {
  Vec out(p_);
  for (Index i = 0; i < N(); ++i) {
    out.segment(local_offset(i), local(i).rows()) = local(i).apply(x.segment(offset(i), dim(i)));
  }
  return out;
}

Vec AggregativeGame::local_apply_transpose(const Eigen::Ref<const Vec>& lam) const {
  Vec out(n_);
  for (Index i = 0; i < N(); ++i) {
    out.segment(offset(i), dim(i)) = local(i).apply_transpose(lam.segment(local_offset(i), local(i).rows()));
  }
  return out;
}

Vec AggregativeGame::pseudo_gradient(const Vec& y0, const Vec& x) const {
  return Q_.apply(x) + C_ * y0 + h_;
}

double AggregativeGame::follower_cost(Index i, const Vec& y0, const Vec& x) const {
  const auto& f = follower(i);
  const auto xi = x.segment(offset(i), f.dim());
  const double inv_n = 1.0 / static_cast<double>(N());
  Vec linear = f.C0 * y0 + f.h;
  if (f.C.is_uniform()) {
    Vec others = Vec::Zero(f.dim());
    for (Index j = 0; j < N(); ++j) {
      if (j != i) others += x.segment(offset(j), dim(j));
    }
    linear += inv_n * (f.C.other_block() * others);
  } else {
    for (Index j = 0; j < N(); ++j) {
      if (j != i) linear += inv_n * (f.C.block(j) * x.segment(offset(j), dim(j)));
    }
  }
  return 0.5 * xi.dot((f.Q + inv_n * f.C.self_block()) * xi) + linear.dot(xi);
}

double AggregativeGame::leader_cost(const Vec& y0, const Vec& x) const {
  if (leader_.custom) return leader_.custom->cost(y0, x);
  Vec aggregate = Vec::Zero(n0());
  for (Index i = 0; i < N(); ++i) {
    aggregate += leader_.S[static_cast<std::size_t>(i)] * x.segment(offset(i), dim(i)) +
                 leader_.t[static_cast<std::size_t>(i)];
  }
  return leader_.r0.dot(y0) + 0.5 * y0.dot(leader_.R0 * y0) + aggregate.dot(y0);
}

Vec AggregativeGame::leader_grad(const Vec& y0, const Vec& x) const {
  if (leader_.custom) return leader_.custom->gradient(y0, x);
  Vec grad(n0() + n_);
  Vec gy = leader_.r0 + 0.5 * (leader_.R0 + leader_.R0.transpose()) * y0;
  for (Index i = 0; i < N(); ++i) {
    const Mat& Si = leader_.S[static_cast<std::size_t>(i)];
    gy += Si * x.segment(offset(i), dim(i)) + leader_.t[static_cast<std::size_t>(i)];
    grad.segment(n0() + offset(i), dim(i)) = Si.transpose() * y0;
  }
  grad.head(n0()) = gy;
  return grad;
}

Vec AggregativeGame::y0_midpoint() const {
  Vec mid(n0());
  for (Index k = 0; k < n0(); ++k) {
    const double lo = leader_.lo[k];
    const double hi = leader_.hi[k];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      mid[k] = 0.5 * (lo + hi);
    } else {
      mid[k] = std::clamp(0.0, lo, hi);
    }
  }
  if (leader_.G0.rows() > 0) {
    std::vector<ConvexSetDescriptor> sets{Box{leader_.lo, leader_.hi}, Polyhedron{leader_.G0, leader_.h0}};
    return dykstra(sets, mid);
  }
  return mid;
}

// ---------------------------------------------------------------------------

PseudoGradientBlocks assemble_pseudo_gradient(const AggregativeGame& game) {
  return {game.Q().dense(), game.C()};
}

double estimate_kappa0(const AggregativeGame& game) {
  if (!game.has_quadratic_leader()) {
    throw UnsupportedFormError("kappa0 is only computable for the quadratic-bilinear leader cost");
  }
  // Hessian [[R, S], [S^T, 0]]; its nonzero eigenvalues solve the quadratic
  // eigenproblem (lambda^2 I - lambda R - S S^T) u = 0, linearised below.
  const Index n0 = game.n0();
  if (n0 == 0) return 0.0;
  const auto& leader = game.leader();
  const Mat R = 0.5 * (leader.R0 + leader.R0.transpose());
  Mat SSt = Mat::Zero(n0, n0);
  for (const auto& Si : leader.S) SSt.noalias() += Si * Si.transpose();
  Mat companion = Mat::Zero(2 * n0, 2 * n0);
  companion.topLeftCorner(n0, n0) = R;
  companion.topRightCorner(n0, n0) = SSt;
  companion.bottomLeftCorner(n0, n0).setIdentity();
  Eigen::EigenSolver<Mat> solver(companion, false);
  double norm = 0.0;
  for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
    norm = std::max(norm, std::abs(solver.eigenvalues()[k]));
  }
  return norm;
}

double leader_lipschitz(const AggregativeGame& game) {
  if (game.has_quadratic_leader()) return estimate_kappa0(game);
  return game.leader().custom->kappa0;
}

GameDiagnostics diagnose(const AggregativeGame& game) {
  GameDiagnostics d;
  const auto& tol = game.tolerances();
  for (Index i = 0; i < game.N(); ++i) {
    const auto& f = game.follower(i);
    const std::string who = "follower " + std::to_string(i) + ": ";
    if (f.dim() > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(f.Q, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -tol.psd) {
        d.follower_q_psd = false;
        d.messages.push_back(who + "Q is not positive semidefinite");
      }
    }
    const auto& local = game.local(i);
    Index rank = 0;
    if (local.rows() > 0 && local.cols() > 0) {
      Eigen::JacobiSVD<Mat> svd(local.F());
      const auto& s = svd.singularValues();
      for (Index k = 0; k < s.size(); ++k) rank += s[k] > tol.rank * std::max(1.0, s[0]) ? 1 : 0;
    }
    if (rank != local.rows()) {
      d.local_full_row_rank = false;
      d.messages.push_back(who + "rank(F) = " + std::to_string(rank) + " < p_i = " +
                           std::to_string(local.rows()));
    }
    if (local.is_box()) {
      if ((local.box_lo().array() > local.box_hi().array()).any()) {
        d.local_nonempty = false;
        d.messages.push_back(who + "local box is empty");
      }
      if (!local.box_lo().allFinite() || !local.box_hi().allFinite()) {
        d.local_bounded = false;
        d.messages.push_back(who + "local box is unbounded");
      }
    } else {
      try {
        Vec point = project(Polyhedron{local.F(), local.g()}, Vec::Zero(f.dim()));
        if (violation(Polyhedron{local.F(), local.g()}, point) > 1e-8) throw EmptyIntersectionError("", 1.0);
      } catch (const Error&) {
        d.local_nonempty = false;
        d.messages.push_back(who + "local polyhedron looks empty");
      }
      // Bounded iff F has full column rank and F^T y = 0 for some y > 0.
      const Mat& F = local.F();
      Eigen::ColPivHouseholderQR<Mat> qr(F);
      qr.setThreshold(tol.rank);
      bool bounded = F.rows() > 0 && qr.rank() == f.dim();
      if (bounded) {
        const Vec ones = Vec::Ones(F.rows());
        auto apply = [&](const Vec& z) { return Vec(F.transpose() * z); };
        auto apply_t = [&](const Vec& r) { return Vec(F * r); };
        Vec norms = F.rowwise().norm();
        auto res = linalg::nonnegative_least_squares(apply, apply_t, norms, F.transpose() * ones, 1e-14);
        bounded = res.residual <= 1e-8;
      }
      if (!bounded) {
        d.local_bounded = false;
        d.messages.push_back(who + "local polyhedron is unbounded");
      }
    }
  }
  const auto& leader = game.leader();
  if ((leader.lo.array() > leader.hi.array()).any()) {
    d.leader_set_nonempty = false;
    d.messages.push_back("leader: Y0 box is empty");
  } else if (leader.G0.rows() > 0) {
    try {
      game.y0_midpoint();
    } catch (const Error&) {
      d.leader_set_nonempty = false;
      d.messages.push_back("leader: Y0 looks empty");
    }
  }
  if (d.local_nonempty) {
    try {
      CoupledSet theta(game);
      Vec x = theta.project(Vec::Zero(game.n()));
      if (theta.violation(x) > 1e-8) throw EmptyIntersectionError("", theta.violation(x));
    } catch (const Error&) {
      d.coupled_set_nonempty = false;
      d.messages.push_back("coupled feasible set looks empty");
    }
  }
  d.monotone = game.monotone();
  if (d.monotone.has_value() && !*d.monotone) d.messages.push_back("Q + Q^T is not positive semidefinite");
  return d;
}

}  // namespace stackelberg
