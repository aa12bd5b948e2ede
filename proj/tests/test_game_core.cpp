#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stackelberg/checks.hpp"
#include "stackelberg/game.hpp"
#include "stackelberg/game_json.hpp"
#include "stackelberg/pev.hpp"
#include "stackelberg/stacked.hpp"
#include "stackelberg/vgne.hpp"
#include "support/desk.hpp"

using namespace stackelberg;
using desk::m1;
using desk::v1;

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

AggregativeGame two_interacting() {
  std::vector<FollowerData> fs;
  for (Index i = 0; i < 2; ++i) {
    FollowerData f;
    f.Q = m1(2.0);
    f.C = InteractionRow::uniform(m1(0.0), m1(1.0), 2, i);
    f.C0 = m1(-1.0);
    desk::set_box(f, v1(0.0), v1(3.0));
    f.A = m1(1.0);
    fs.push_back(f);
  }
  return AggregativeGame(desk::scalar_leader(2, 0.0, 1.0, 0.0, 0.0, 0.0), fs, v1(2.0));
}

}  // namespace

TEST(PseudoGradient, SingleFollowerReduction) {
  FollowerData f;
  f.Q = m1(2.0);
  f.C = InteractionRow::uniform(m1(0.0), m1(0.0), 1, 0);
  f.C0 = m1(1.0);
  desk::set_box(f, v1(0.0), v1(1.0));
  f.A = m1(1.0);
  AggregativeGame game(desk::scalar_leader(1, 0.0, 1.0, 0.0, 0.0, 0.0), {f}, v1(1.0));
  const auto blocks = assemble_pseudo_gradient(game);
  EXPECT_EQ(blocks.Q, m1(2.0));
  EXPECT_EQ(blocks.C, m1(1.0));
}

TEST(PseudoGradient, TwoFollowerHandExpansion) {
  const auto blocks = assemble_pseudo_gradient(two_interacting());
  Mat Q(2, 2);
  Q << 2.0, 0.5, 0.5, 2.0;
  Mat C(2, 1);
  C << -1.0, -1.0;
  EXPECT_LE((blocks.Q - Q).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LE((blocks.C - C).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(PseudoGradient, FullAndUniformRowsAgree) {
  desk::RandomSpec spec;
  spec.N = 4;
  const auto game = desk::random_game(spec);
  std::vector<FollowerData> fs = game.followers();
  for (Index i = 0; i < game.N(); ++i) {
    std::vector<Mat> blocks;
    for (Index j = 0; j < game.N(); ++j) blocks.push_back(fs[i].C.block(j));
    fs[i].C = InteractionRow::full(blocks, i);
  }
  AggregativeGame dense(game.leader(), fs, game.b());
  EXPECT_FALSE(dense.Q().structured());
  EXPECT_TRUE(game.Q().structured());
  EXPECT_LE((dense.Q().dense() - game.Q().dense()).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(PseudoGradient, DimensionMismatchNamesFollower) {
  auto fs = desk::two_symmetric().followers();
  fs[1].C0 = Mat::Zero(2, 1);
  try {
    AggregativeGame(desk::scalar_leader(2, 0.0, 1.0, 0.0, 0.0, 0.0), fs, v1(2.0));
    FAIL() << "expected StructuralError";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("follower 1"), std::string::npos) << e.what();
  }
}

TEST(PseudoGradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    desk::RandomSpec spec;
    spec.seed = seed;
    const auto r = check_pseudo_gradient(desk::random_game(spec), 20, seed);
    EXPECT_TRUE(r.pass) << r.detail;
  }
  PevParams p;
  p.N = 4;
  const auto r = check_pseudo_gradient(generate_instance(p), 20, 7);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(AssembleStacked, DimensionBookkeeping) {
  const auto sys = desk::stacked(desk::single_clamp());
  EXPECT_EQ(sys->size(), 1 + 7);
  Vec d(4);
  d << 0.0, 10.0, 1.0, 0.0;
  EXPECT_EQ(sys->d(), d);
}

TEST(AssembleStacked, ExactVgneTupleSatisfiesEqualities) {
  desk::RandomSpec spec;
  spec.N = 5;
  const auto sys = desk::stacked(desk::random_game(spec));
  const auto w = feasible_init(*sys, RelaxationParams::uniform(1e-2, 5), sys->game().y0_midpoint());
  EXPECT_LE(inf_norm(sys->residual(w)), 1e-8);
}

TEST(AssembleStacked, ZeroGame) {
  FollowerData f;
  f.Q = m1(0.0);
  f.C = InteractionRow::uniform(m1(0.0), m1(0.0), 1, 0);
  f.C0 = m1(0.0);
  desk::set_box(f, v1(0.0), v1(0.0));
  f.A = m1(0.0);
  const auto sys = desk::stacked(AggregativeGame(desk::scalar_leader(1, 0.0, 0.0, 0.0, 0.0, 0.0), {f}, v1(0.0)));
  OmegaPoint w(sys->layout());
  EXPECT_TRUE(sys->d().isZero(0.0));
  EXPECT_TRUE(sys->apply(w.data).isZero(0.0));
}

// Each row group of A_omega omega - d equals its defining expression, built
// here from the dense game matrices.
TEST(AssembleStacked, RowIdentitiesOnRandomTuples) {
  desk::RandomSpec spec;
  spec.N = 3;
  spec.seed = 11;
  const auto sys = desk::stacked(desk::random_game(spec));
  const auto& game = sys->game();
  Mat F = Mat::Zero(game.p(), game.n());
  for (Index i = 0; i < game.N(); ++i) {
    F.block(game.local_offset(i), game.offset(i), game.follower(i).local_rows(), game.dim(i)) = game.follower(i).F;
  }
  const Mat Q = game.Q().dense();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    OmegaPoint w(sys->layout());
    for (Index k = 0; k < w.data.size(); ++k) w.data[k] = u(gen);
    const Vec lam_loc = w.lambda_local_stacked();
    const Vec mu_loc = w.mu_local_stacked();
    const Vec r = sys->residual(w);
    const Vec stat = Q * w.x() + game.C() * w.y0() + game.h() + game.A().transpose() * w.lambda() +
                     F.transpose() * lam_loc;
    const Vec coupling = game.A() * w.x() + w.mu() - game.b();
    const Vec local = F * w.x() + mu_loc - game.g();
    EXPECT_LE(inf_norm(r.head(game.n()) - stat), 1e-12);
    EXPECT_LE(inf_norm(r.segment(game.n(), game.m()) - coupling), 1e-12);
    EXPECT_LE(inf_norm(r.tail(game.p()) - local), 1e-12);
  }
}

TEST(AssembleStacked, DenseBlocksMatchOperators) {
  desk::RandomSpec spec;
  spec.N = 3;
  const auto sys = desk::stacked(desk::random_game(spec));
  const Mat A = sys->dense();
  Vec w = Vec::LinSpaced(sys->size(), -1.0, 1.0);
  EXPECT_LE(inf_norm(A * w - sys->apply(w)), 1e-12);
  Vec r = Vec::LinSpaced(sys->rows(), 0.5, -2.0);
  EXPECT_LE(inf_norm(A.transpose() * r - sys->apply_transpose(r)), 1e-12);
  const double spectral_sq = Eigen::JacobiSVD<Mat>(A).singularValues()(0);
  EXPECT_GE(sys->norm_sq(), spectral_sq * spectral_sq * (1.0 - 1e-9));
}

TEST(Antidiagonal, HalfQuadraticFormIsComplementarity) {
  const auto r = check_antidiagonal_identity(7, 100, 3);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_LE(r.worst, 1e-12);
  const Mat P = antidiagonal_identity(2);
  Mat expected(4, 4);
  expected << 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0;
  EXPECT_EQ(P, expected);
}

TEST(LeaderCost, PevFormIsNegativeRevenue) {
  PevParams p;
  p.N = 3;
  p.T = 4;
  p.D = Vec::Constant(4, 0.7);
  p.capacity = Vec::Constant(4, 1.0);
  const auto game = generate_instance(p);
  const Vec price = Vec::LinSpaced(4, 0.1, 0.4);
  const Vec x = Vec::LinSpaced(12, 0.0, 1.0);
  Vec sigma = Vec::Zero(4);
  for (Index i = 0; i < 3; ++i) sigma += x.segment(4 * i, 4) / 3.0;
  EXPECT_NEAR(game.leader_cost(price, x), -price.dot(p.D + sigma), 1e-14);
}

TEST(LeaderCost, BilinearGradientVanishesAtZeroPrice) {
  PevParams p;
  p.N = 3;
  const auto game = generate_instance(p);
  const Vec g = game.leader_grad(Vec::Zero(game.n0()), Vec::Constant(game.n(), 0.3));
  EXPECT_TRUE(g.tail(game.n()).isZero(0.0));
}

TEST(LeaderCost, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    desk::RandomSpec spec;
    spec.seed = seed;
    const auto r = check_leader_gradient(desk::random_game(spec), 20, seed);
    EXPECT_TRUE(r.pass) << r.detail;
  }
}

TEST(Residuals, ExactInitialisationPasses) {
  const auto sys = desk::stacked(desk::two_symmetric());
  for (double theta : {1e-6, 1e-2, 1.0}) {
    const auto params = RelaxationParams::uniform(theta, 2);
    const auto w = feasible_init(*sys, params, v1(4.0));
    const auto rep = residuals(*sys, params, w);
    EXPECT_TRUE(rep.feasible(1e-8));
    EXPECT_EQ(rep.complementarity_excess, 0.0);
    EXPECT_EQ(rep.local_complementarity_excess, 0.0);
  }
}

TEST(Residuals, ShiftedSlackGivesUnitResidual) {
  const auto sys = desk::stacked(desk::two_symmetric());
  const auto params = RelaxationParams::uniform(1e-2, 2);
  auto w = feasible_init(*sys, params, v1(4.0));
  w.mu().array() += 1.0;
  EXPECT_NEAR(residuals(*sys, params, w).equality, 1.0, 1e-12);
}

TEST(Residuals, ReportsEachViolation) {
  const auto sys = desk::stacked(desk::two_symmetric());
  const auto params = RelaxationParams::uniform(1e-2, 2);
  const auto w0 = feasible_init(*sys, params, v1(4.0));
  auto w = w0;
  w.y0()[0] = 7.0;
  EXPECT_NEAR(residuals(*sys, params, w).leader_violation, 1.0, 1e-12);
  w = w0;
  w.mu_local(0)[0] = -0.25;
  EXPECT_NEAR(residuals(*sys, params, w).bound_violation, 0.25, 1e-12);
  w = w0;
  w.mu()[0] = 0.5;  // lambda = 2, so lambda^T mu = 1
  EXPECT_NEAR(residuals(*sys, params, w).complementarity_excess, 1.0 - 1e-2, 1e-12);
}

TEST(Kappa0, PevCrossHessian) {
  for (Index N : {1, 4, 25}) {
    PevParams p;
    p.N = N;
    p.T = 6;
    EXPECT_NEAR(estimate_kappa0(generate_instance(p)), 1.0 / std::sqrt(static_cast<double>(N)), 1e-10);
  }
}

TEST(Kappa0, LinearAndPureQuadratic) {
  auto fs = desk::two_symmetric().followers();
  EXPECT_EQ(estimate_kappa0(AggregativeGame(desk::scalar_leader(2, 0.0, 1.0, 0.0, 1.0, 0.0), fs, v1(2.0))), 0.0);
  LeaderData l;
  l.n0 = 2;
  l.lo = Vec::Zero(2);
  l.hi = Vec::Ones(2);
  l.R0 = 2.0 * Mat::Identity(2, 2);
  for (auto& f : fs) f.C0 = Mat::Zero(1, 2);
  EXPECT_NEAR(estimate_kappa0(AggregativeGame(l, fs, v1(2.0))), 2.0, 1e-12);
}

TEST(Kappa0, CustomLeaderCostIsUnsupported) {
  LeaderData l = desk::scalar_leader(2, 0.0, 1.0, 0.0, 0.0, 0.0);
  l.custom = CustomLeaderCost{[](const Vec& y0, const Vec&) { return y0.squaredNorm(); },
                              [](const Vec& y0, const Vec& x) {
                                Vec g = Vec::Zero(y0.size() + x.size());
                                g.head(y0.size()) = 2.0 * y0;
                                return g;
                              },
                              2.0};
  AggregativeGame game(l, desk::two_symmetric().followers(), v1(2.0));
  EXPECT_THROW(estimate_kappa0(game), UnsupportedFormError);
  EXPECT_EQ(leader_lipschitz(game), 2.0);
}

TEST(Monotonicity, AcceptedGamesAreMonotone) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    desk::RandomSpec spec;
    spec.seed = seed;
    const auto game = desk::random_game(spec);
    ASSERT_TRUE(game.monotone().has_value());
    EXPECT_TRUE(*game.monotone());
    PevParams p;
    p.N = 5;
    p.seed = seed;
    EXPECT_TRUE(generate_instance(p).monotone().value_or(false));
  }
}

TEST(Monotonicity, FlagsNonMonotoneInteraction) {
  std::vector<FollowerData> fs;
  for (Index i = 0; i < 2; ++i) {
    FollowerData f;
    f.Q = m1(0.1);
    f.C = InteractionRow::uniform(m1(0.0), m1(4.0), 2, i);
    f.C0 = m1(0.0);
    desk::set_box(f, v1(0.0), v1(1.0));
    f.A = m1(1.0);
    fs.push_back(f);
  }
  AggregativeGame game(desk::scalar_leader(2, 0.0, 1.0, 0.0, 0.0, 0.0), fs, v1(2.0));
  EXPECT_FALSE(game.monotone().value_or(true));
  EXPECT_FALSE(diagnose(game).ok());
}

TEST(Diagnostics, DeskInstancesPass) {
  EXPECT_TRUE(diagnose(desk::two_symmetric()).ok());
  EXPECT_TRUE(diagnose(desk::single_clamp()).ok());
  auto fs = desk::two_symmetric().followers();
  fs[0].g << -1.0, -1.0;  // x <= -1 and x >= 1
  EXPECT_FALSE(diagnose(AggregativeGame(desk::scalar_leader(2, 0.0, 1.0, 0.0, 0.0, 0.0), fs, v1(2.0))).ok());
}

TEST(GameJson, RoundTripIsExact) {
  desk::RandomSpec spec;
  spec.N = 3;
  const auto game = desk::random_game(spec);
  const auto j = game_to_json(game);
  const auto back = game_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(game_to_json(back), j);
  EXPECT_EQ(back.Q().dense(), game.Q().dense());
  EXPECT_EQ(back.A(), game.A());
  EXPECT_EQ(back.g(), game.g());
  EXPECT_EQ(back.h(), game.h());
  EXPECT_EQ(back.leader().R0, game.leader().R0);

  PevParams p;
  p.N = 4;
  const auto pev = generate_instance(p);
  EXPECT_EQ(game_to_json(game_from_json(nlohmann::json::parse(game_to_json(pev).dump()))), game_to_json(pev));
}

TEST(GameJson, MissingKeyIsStructural) {
  auto j = game_to_json(desk::two_symmetric());
  j["followers"][0].erase("Q");
  EXPECT_THROW(game_from_json(j), StructuralError);
  j = game_to_json(desk::two_symmetric());
  j["b"] = {1.0, 2.0};
  EXPECT_THROW(game_from_json(j), StructuralError);
}
