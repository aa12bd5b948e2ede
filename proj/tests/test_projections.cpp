#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "stackelberg/projections.hpp"
#include "support/qp_oracle.hpp"

using namespace stackelberg;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

Vec gaussian(Index n, std::mt19937_64& gen, double scale = 2.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (Index k = 0; k < n; ++k) v[k] = d(gen);
  return v;
}

// One instance of every descriptor, all in dimension 4.
std::vector<ConvexSetDescriptor> sample_sets() {
  Mat G(3, 4);
  G << 1, 1, 0, 0, 0, 1, 1, 1, -1, 0, 0, 0;
  return {
      Box{vec({-1, 0, 0.5, -2}), vec({1, 2, 0.5, 3})},
      NonnegOrthant{4},
      Halfspace{vec({1, -2, 0.5, 1}), 0.7},
      Polyhedron{G, vec({1, 2, 0.5})},
      QuadSublevel{vec({0.3, 0.0, 0.0, 0.8}), 0.05},
  };
}

// Rejection sample of feasible points near a projection.
std::vector<Vec> feasible_samples(const ConvexSetDescriptor& set, const Vec& center, std::mt19937_64& gen, int count) {
  std::vector<Vec> out;
  for (int attempt = 0; attempt < 200000 && static_cast<int>(out.size()) < count; ++attempt) {
    const Vec u = center + gaussian(center.size(), gen, 0.3);
    if (violation(set, u) == 0.0) out.push_back(u);
  }
  return out;
}

}  // namespace

TEST(Project, BoxClamps) {
  const Vec p = project(Box{Vec::Zero(3), Vec::Ones(3)}, vec({-0.5, 0.3, 2.0}));
  EXPECT_EQ(p, vec({0.0, 0.3, 1.0}));
}

TEST(Project, FeasiblePointOfQuadSublevelIsFixed) {
  const QuadSublevel q{vec({1.0, 0.0, 0.0, 2.0}), 0.1};
  const Vec v = vec({1.1, 0.0, 0.05, 2.0});
  ASSERT_EQ(violation(q, v), 0.0);
  EXPECT_EQ(project(q, v), v);
}

TEST(Project, QuadSublevelValueIsComplementarityPlusProximity) {
  const Vec anchor = vec({1.0, 0.5, 0.0, 2.0});
  const Vec nu = vec({0.2, 1.5, 0.7, 0.1});
  const Vec lambda = nu.head(2), mu = nu.tail(2);
  EXPECT_NEAR(quad_sublevel_value(anchor, nu), lambda.dot(mu) + 0.5 * (nu - anchor).squaredNorm(), 1e-14);
  // The anchor itself: its complementarity product.
  EXPECT_NEAR(quad_sublevel_value(anchor, anchor), anchor.head(2).dot(anchor.tail(2)), 1e-14);
}

TEST(Project, PolyhedronHandKkt) {
  Mat G(3, 2);
  G << 1, 1, -1, 0, 0, -1;
  const Vec p = project(Polyhedron{G, vec({2, 0, 0})}, vec({2, 2}));
  EXPECT_LE((p - vec({1, 1})).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Project, HalfspaceClosedForm) {
  const Halfspace h{vec({3, 4}), 5.0};
  const Vec p = project(h, vec({3, 4}));  // a^T v = 25, step (25 - 5) / 25 along a
  EXPECT_LE((p - vec({3 - 2.4, 4 - 3.2})).norm(), 1e-14);
}

TEST(Project, PolyhedronMatchesOracle) {
  std::mt19937_64 gen(9);
  Mat G(5, 3);
  G << 1, 1, 1, -1, 0, 0, 0, -1, 0, 0, 0, -1, 1, -1, 0.5;
  const Vec h = vec({1.5, 0, 0, 0, 0.3});
  for (int trial = 0; trial < 30; ++trial) {
    const Vec v = gaussian(3, gen);
    const Vec expect = oracle::project_polyhedron(G, h, v);
    EXPECT_LE((project(Polyhedron{G, h}, v, {1e-13, 200000}) - expect).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(Project, BoxHalfspaceMatchesOracle) {
  std::mt19937_64 gen(4);
  const Vec lo = vec({0, 0, -1, 0}), hi = vec({1, 2, 1, 1});
  const Vec a = vec({1, 0.5, 1, 2});
  Mat G(9, 4);
  G << Mat::Identity(4, 4), -Mat::Identity(4, 4), a.transpose();
  Vec h(9);
  h << hi, -lo, 1.2;
  for (int trial = 0; trial < 30; ++trial) {
    const Vec v = gaussian(4, gen);
    EXPECT_LE((project_box_halfspace(lo, hi, a, 1.2, v) - oracle::project_polyhedron(G, h, v)).lpNorm<Eigen::Infinity>(),
              1e-9);
  }
  EXPECT_THROW(project_box_halfspace(lo, hi, a, -5.0, Vec::Zero(4)), EmptyIntersectionError);
}

TEST(Dykstra, SingleSetEqualsProject) {
  std::mt19937_64 gen(2);
  for (const auto& set : sample_sets()) {
    const Vec v = gaussian(4, gen);
    const std::vector<ConvexSetDescriptor> one{set};
    EXPECT_EQ(dykstra(one, v), project(set, v));
  }
}

TEST(Dykstra, OverlappingBoxesGiveIntersectionBox) {
  const std::vector<ConvexSetDescriptor> sets{Box{vec({0, 0}), vec({2, 2})}, Box{vec({1, -1}), vec({3, 1})}};
  const Vec p = dykstra(sets, vec({-1, 5}));
  EXPECT_LE((p - vec({1, 1})).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Dykstra, OrthantHalfspaceMatchesOracle) {
  std::mt19937_64 gen(17);
  const Vec a = vec({1, 2, -1});
  Mat G(4, 3);
  G << -Mat::Identity(3, 3), a.transpose();
  const Vec h = vec({0, 0, 0, 1});
  const std::vector<ConvexSetDescriptor> sets{NonnegOrthant{3}, Halfspace{a, 1.0}};
  for (int trial = 0; trial < 30; ++trial) {
    Vec v = gaussian(3, gen);
    v[0] = -std::abs(v[0]) - 0.5;
    v[1] = std::abs(v[1]) + 1.0;  // outside both sets
    EXPECT_LE((dykstra(sets, v, {1e-13, 100000}) - oracle::project_polyhedron(G, h, v)).lpNorm<Eigen::Infinity>(),
              1e-8);
  }
}

TEST(Dykstra, EmptyIntersectionIsDiagnosed) {
  const std::vector<ConvexSetDescriptor> sets{Halfspace{vec({1, 0}), -1.0}, Halfspace{vec({-1, 0}), -1.0}};
  EXPECT_THROW(dykstra(sets, vec({0, 0}), {1e-12, 2000}), EmptyIntersectionError);
}

TEST(Project, RejectsMalformedDescriptors) {
  EXPECT_THROW(validate(Box{vec({1}), vec({0})}), PreconditionError);
  EXPECT_THROW(validate(QuadSublevel{vec({1, 0}), 0.0}), PreconditionError);
  EXPECT_THROW(validate(QuadSublevel{vec({-1, 0}), 1.0}), PreconditionError);
  EXPECT_THROW(project(Box{Vec::Zero(2), Vec::Ones(2)}, Vec::Zero(3)), PreconditionError);
}

TEST(ProjectionProperties, Idempotent) {
  std::mt19937_64 gen(21);
  for (const auto& set : sample_sets()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec p = project(set, gaussian(4, gen), {1e-13, 200000});
      EXPECT_LE((project(set, p, {1e-13, 200000}) - p).lpNorm<Eigen::Infinity>(), 1e-10) << "set " << set.index();
    }
  }
}

TEST(ProjectionProperties, Nonexpansive) {
  std::mt19937_64 gen(22);
  for (const auto& set : sample_sets()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec v = gaussian(4, gen), w = gaussian(4, gen);
      const Vec pv = project(set, v, {1e-13, 200000}), pw = project(set, w, {1e-13, 200000});
      EXPECT_LE((pv - pw).norm(), (v - w).norm() + 1e-10) << "set " << set.index();
      // Firm nonexpansiveness.
      EXPECT_LE((pv - pw).squaredNorm(), (pv - pw).dot(v - w) + 1e-9) << "set " << set.index();
    }
  }
}

TEST(ProjectionProperties, VariationalInequalityCertificate) {
  std::mt19937_64 gen(23);
  for (const auto& set : sample_sets()) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec v = gaussian(4, gen);
      const Vec p = project(set, v, {1e-13, 200000});
      for (const Vec& u : feasible_samples(set, p, gen, 10)) {
        EXPECT_LE((v - p).dot(u - p), 1e-8) << "set " << set.index();
      }
    }
  }
}

TEST(ProjectionProperties, QuadSublevelProjectionIsFeasibleAndActiveWhenMoved) {
  std::mt19937_64 gen(24);
  const QuadSublevel q{vec({0.5, 0.0, 0.1, 0.0, 1.0, 0.2}), 0.01};
  for (int trial = 0; trial < 100; ++trial) {
    const Vec v = gaussian(6, gen);
    const Vec p = project(q, v);
    EXPECT_LE(violation(q, p), 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    if (violation(q, v.cwiseMax(0.0)) > 0.0) EXPECT_NEAR(quad_sublevel_value(q.anchor, p), q.theta, 1e-10);
  }
}
