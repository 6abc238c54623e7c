#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amnn/gating.hpp"
#include "oracles.hpp"

namespace amnn {
namespace {

TEST(FuzzyMembership, Anchors) {
  const Matrix<double> centers{{0.0, 0.0}};
  const Matrix<double> points{{0.0, 0.0}, {std::sqrt(0.02), 0.0}, {1.0, 0.0}};
  const auto m = fuzzy_membership(points, centers, 0.02);
  EXPECT_EQ(m.g(0, 0), 1.0);
  EXPECT_NEAR(m.g(0, 1), 0.36787944117144233, 1e-12);
  EXPECT_NEAR(m.g(0, 2), 1.9287498479639178e-22, 1e-34);
}

TEST(FuzzyMembership, EntriesArePositiveAndFinite) {
  std::mt19937_64 rng(2);
  const auto x = oracle::random_matrix(50, 3, rng, -20.0, 20.0);
  const auto c = oracle::random_matrix(4, 3, rng, -20.0, 20.0);
  const auto m = fuzzy_membership(x, c);
  for (double v : m.g.flat()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(FuzzyMembership, RejectsBadInput) {
  EXPECT_THROW(fuzzy_membership(Matrix<double>(2, 2), Matrix<double>(0, 2)), Error);
  EXPECT_THROW(fuzzy_membership(Matrix<double>(2, 2), Matrix<double>(1, 2), 0.0), Error);
  EXPECT_THROW(fuzzy_membership(Matrix<double>(2, 2), Matrix<double>(1, 3)), Error);
}

TEST(Route, SingleCenter) {
  std::mt19937_64 rng(1);
  const auto x = oracle::random_matrix(10, 2, rng);
  for (auto r : route(fuzzy_membership(x, Matrix<double>{{0.3, 0.3}}))) EXPECT_EQ(r, 0u);
}

TEST(Route, EquidistantGoesToLowerIndex) {
  const Matrix<double> centers{{-1.0, 0.0}, {1.0, 0.0}};
  const auto r = route(fuzzy_membership(Matrix<double>{{0.0, 5.0}}, centers));
  EXPECT_EQ(r[0], 0u);
}

TEST(Route, InvariantUnderPerSampleRescaling) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_matrix(5, 12, rng, 0.01, 1.0);
    auto scaled = g;
    for (std::size_t i = 0; i < g.cols(); ++i) {
      const double s = scale(rng);
      for (std::size_t k = 0; k < g.rows(); ++k) scaled(k, i) *= s;
    }
    EXPECT_EQ(route(g), route(scaled));
  }
}

TEST(Route, EqualsNearestCenterEvenWhenMembershipsUnderflow) {
  std::mt19937_64 rng(11);
  const auto x = oracle::random_matrix(200, 2, rng, -30.0, 30.0);
  const auto c = oracle::random_matrix(5, 2, rng, -30.0, 30.0);
  const auto r = route(fuzzy_membership(x, c, 0.02));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 5; ++k) {
      if (squared_distance(x.row(i), c.row(k)) < squared_distance(x.row(i), c.row(best))) best = k;
    }
    EXPECT_EQ(r[i], best);
  }
}

TEST(RouteWithPruning, DropsCentersWithoutSamples) {
  const Matrix<double> x{{0.0}, {0.1}, {10.0}, {10.2}};
  const Matrix<double> centers{{0.0}, {50.0}, {10.0}};
  const auto r = route_with_pruning(x, centers);
  EXPECT_EQ(r.centers.rows(), 2u);
  EXPECT_EQ(r.kept, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(r.routes, (std::vector<std::size_t>{0, 0, 1, 1}));
}

}  // namespace
}  // namespace amnn
