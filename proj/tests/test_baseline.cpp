#include <gtest/gtest.h>

#include <sstream>

#include "stackelberg/baseline.hpp"
#include "stackelberg/pev.hpp"
#include "support/desk.hpp"

using namespace stackelberg;
using desk::v1;

TEST(LeaderBestResponse, PevPricesAtCap) {
  PevParams p;
  p.N = 5;
  p.T = 6;
  p.p_bar = 0.8;
  const auto game = generate_instance(p);
  const Vec x = Vec::Constant(game.n(), 0.1);
  const Vec y0 = leader_best_response(game, x);
  EXPECT_EQ(y0, Vec::Constant(6, 0.8));
}

TEST(LeaderBestResponse, InteriorQuadraticOptimum) {
  // 0.5 (y0 - 2)^2 - (x1 + x2) y0 / 2 is minimised at y0 = 2 + (x1 + x2) / 2.
  const auto game = desk::two_symmetric();
  const Vec x = Vec::Ones(2);
  const Vec y0 = leader_best_response(game, x);
  EXPECT_NEAR(y0[0], 3.0, 1e-8);
  EXPECT_LE(std::abs(game.leader_grad(y0, x)[0]), 1e-8);
}

TEST(LeaderBestResponse, ClampsToBox) {
  const auto game = desk::two_symmetric();
  EXPECT_NEAR(leader_best_response(game, Vec::Constant(2, 10.0))[0], 6.0, 1e-8);
}

TEST(LeaderBestResponse, SingletonLeaderSet) {
  FollowerData f = desk::single_clamp().follower(0);
  const auto game = AggregativeGame(desk::scalar_leader(1, 0.25, 0.25, 1.0, -3.0, 1.0), {f}, v1(10.0));
  EXPECT_EQ(leader_best_response(game, v1(0.5))[0], 0.25);
}

TEST(NaiveRun, FixedPointStartStopsAfterOneIteration) {
  // y0 = 3 gives x = (1, 1), whose best response is y0 = 3 again.
  const auto game = desk::two_symmetric();
  const auto r = naive_run(game, {}, v1(3.0));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(r.y0[0], 3.0, 1e-8);
  EXPECT_NEAR(r.x[0], 1.0, 1e-7);
}

TEST(NaiveRun, FirstStepIsFullBestResponse) {
  desk::RandomSpec spec;
  spec.N = 4;
  const auto game = desk::random_game(spec);
  NaiveConfig cfg;
  cfg.max_iter = 1;
  const auto r = naive_run(game, cfg);
  EXPECT_EQ(r.trace.rows.size(), 1u);
  EXPECT_LE((r.y0 - leader_best_response(game, r.x)).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(NaiveRun, IteratesStayInLeaderSet) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    desk::RandomSpec spec;
    spec.N = 4;
    spec.seed = seed;
    const auto game = desk::random_game(spec);
    NaiveConfig cfg;
    for (int iters : {1, 5, 30}) {
      cfg.max_iter = iters;
      const auto r = naive_run(game, cfg);
      EXPECT_LE((project_leader_set(game, r.y0) - r.y0).lpNorm<Eigen::Infinity>(), 1e-10);
      EXPECT_EQ(r.trace.rows.size(), static_cast<std::size_t>(r.iterations));
    }
  }
}

TEST(NaiveRun, ConstantBetaAveragesWithPreviousDecision) {
  const auto game = desk::two_symmetric();
  NaiveConfig cfg;
  cfg.beta_constant = 0.5;
  cfg.max_iter = 1;
  // From y0 = 6: x = (1, 1), best response 3, average 4.5.
  const auto r = naive_run(game, cfg, v1(6.0));
  EXPECT_NEAR(r.y0[0], 4.5, 1e-8);
  EXPECT_NEAR(r.trace.rows[0].y0_step_norm, 1.5, 1e-8);
}

TEST(NaiveRun, HarmonicBetaSchedule) {
  NaiveConfig cfg;
  EXPECT_EQ(cfg.beta(1), 1.0);
  EXPECT_EQ(cfg.beta(4), 0.25);
  cfg.beta_constant = 0.3;
  EXPECT_EQ(cfg.beta(7), 0.3);
}

TEST(NaiveConfig, Validation) {
  NaiveConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta_constant = 1.5;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = NaiveConfig{};
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = NaiveConfig{};
  c.max_iter = 0;
  EXPECT_THROW(naive_run(desk::two_symmetric(), c), PreconditionError);
}

TEST(NaiveTrace, CsvColumns) {
  NaiveTrace t;
  t.rows.push_back({1, -2.5, 0.5, 7, 3.0});
  std::ostringstream with, without;
  t.write_csv(with);
  t.write_csv(without, false);
  EXPECT_EQ(with.str(), "k,J0,y0_step_norm,vgne_iters,wall_ms\n1,-2.5,0.5,7,3\n");
  EXPECT_EQ(without.str(), "k,J0,y0_step_norm,vgne_iters\n1,-2.5,0.5,7\n");
}
