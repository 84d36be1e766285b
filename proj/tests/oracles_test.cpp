#include "monge/oracles.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

namespace monge::oracles {
namespace {

using monge::testing::brute_force_assignment;
using monge::testing::random_points;
using monge::testing::random_spd;

Tensor column(std::initializer_list<double> v) {
  Tensor t(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) t(i++, 0) = x;
  return t;
}

TEST(ExactOt, SamePointsGiveIdentity) {
  std::mt19937_64 eng(1);
  const Tensor x = random_points(eng, 20, 3);
  const auto sol = discrete_ot_exact(x, x, CostSpec::quadratic(3));
  EXPECT_EQ(sol.cost, 0.0);
  for (std::size_t i = 0; i < sol.assignment.size(); ++i) EXPECT_EQ(sol.assignment[i], static_cast<int>(i));
}

TEST(ExactOt, TwoPointExample) {
  const auto sol = discrete_ot_exact(column({0, 1}), column({1, 2}), CostSpec::quadratic(1));
  EXPECT_DOUBLE_EQ(sol.cost, 1.0);
  EXPECT_EQ(sol.assignment, (std::vector<int>{0, 1}));
}

TEST(ExactOt, PlanIsScaledPermutation) {
  std::mt19937_64 eng(2);
  const auto sol = discrete_ot_exact(random_points(eng, 9, 2), random_points(eng, 9, 2), CostSpec::quadratic(2));
  for (Eigen::Index i = 0; i < 9; ++i) {
    EXPECT_NEAR(sol.plan.row(i).sum(), 1.0 / 9, 1e-15);
    EXPECT_NEAR(sol.plan.col(i).sum(), 1.0 / 9, 1e-15);
  }
}

TEST(ExactOt, MatchesExhaustiveSearch) {
  std::mt19937_64 eng(3);
  std::uniform_int_distribution<int> size(1, 7);
  for (int t = 0; t < 50; ++t) {
    const int n = size(eng);
    const Eigen::MatrixXd c = random_points(eng, n, n, 0.0, 10.0);
    EXPECT_NEAR(discrete_ot_exact(c).cost, brute_force_assignment(c), 1e-12) << "instance " << t;
  }
}

TEST(ExactOt, HandlesNegativeAndTiedCosts) {
  Eigen::MatrixXd c(3, 3);
  c << -1, -1, -1, -1, -1, -1, 2, 2, -5;
  EXPECT_NEAR(discrete_ot_exact(c).cost, brute_force_assignment(c), 1e-15);
}

TEST(ExactOt, AgreesWithSortedMatchingIn1d) {
  std::mt19937_64 eng(4);
  const Tensor x = random_points(eng, 256, 1), y = random_points(eng, 256, 1, 0.5, 3.0);
  const auto mono = monotone_map_1d(sorted_copy({x.data(), 256}), sorted_copy({y.data(), 256}),
                                    [](double d) { return d * d; });
  EXPECT_NEAR(discrete_ot_exact(x, y, CostSpec::quadratic(1)).cost, mono.cost, 1e-6);
}

TEST(ExactOt, RejectsOversizeAndMismatch) {
  EXPECT_THROW(discrete_ot_exact(Eigen::MatrixXd::Zero(513, 513)), Error);
  EXPECT_THROW(discrete_ot_exact(Eigen::MatrixXd::Zero(3, 4)), Error);
  EXPECT_THROW(discrete_ot_exact(Eigen::MatrixXd(0, 0)), Error);
}

TEST(Sinkhorn, TwoPointExampleNearExact) {
  const auto sol = sinkhorn(column({0, 1}), column({1, 2}), CostSpec::quadratic(1), 0.01);
  EXPECT_NEAR(sol.cost, 1.0, 0.05);
}

TEST(Sinkhorn, MarginalsAreUniform) {
  std::mt19937_64 eng(5);
  const auto sol = sinkhorn(random_points(eng, 40, 2), random_points(eng, 40, 2), CostSpec::quadratic(2), 0.05);
  for (Eigen::Index i = 0; i < 40; ++i) {
    EXPECT_NEAR(sol.plan.row(i).sum(), 1.0 / 40, 1e-6);
    EXPECT_NEAR(sol.plan.col(i).sum(), 1.0 / 40, 1e-6);
  }
}

TEST(Sinkhorn, LargeEpsilonGivesIndependentCoupling) {
  std::mt19937_64 eng(6);
  const auto sol = sinkhorn(random_points(eng, 10, 2), random_points(eng, 10, 2), CostSpec::quadratic(2), 1e6);
  EXPECT_LT((sol.plan.array() - 0.01).abs().maxCoeff(), 1e-6);
}

TEST(Sinkhorn, WithinFivePercentOfExactAtSmallEpsilon) {
  std::mt19937_64 eng(7);
  // Unit-scale clouds with a unit offset keep the exact cost of order one.
  for (int t = 0; t < 10; ++t) {
    const Tensor x = random_points(eng, 64, 2, -1.0, 1.0);
    const Tensor y = (random_points(eng, 64, 2, -1.0, 1.0).array() + 1.0).matrix();
    const auto c = CostSpec::quadratic(2);
    const double exact = discrete_ot_exact(x, y, c).cost;
    EXPECT_NEAR(sinkhorn(x, y, c, 0.01).cost, exact, 0.05 * exact);
  }
}

TEST(Sinkhorn, GapShrinksAsEpsilonDecreases) {
  std::mt19937_64 eng(8);
  for (int t = 0; t < 5; ++t) {
    const Tensor x = random_points(eng, 32, 2), y = random_points(eng, 32, 2);
    const auto c = CostSpec::quadratic(2);
    const double exact = discrete_ot_exact(x, y, c).cost;
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1.0, 0.1, 0.01}) {
      const double gap = sinkhorn(x, y, c, eps).cost - exact;
      EXPECT_GE(gap, -1e-8);
      EXPECT_LE(gap, prev + 1e-8);
      prev = gap;
    }
  }
}

TEST(Sinkhorn, RejectsBadInput) {
  EXPECT_THROW(sinkhorn(Eigen::MatrixXd::Zero(2, 2), 0.0), Error);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sinkhorn(c, 0.1), Error);
}

TEST(Sinkhorn, CouplingCsvListsNonzeroEntries) {
  const auto sol = discrete_ot_exact(column({0, 1}), column({1, 2}), CostSpec::quadratic(1));
  std::ostringstream out;
  write_coupling_csv(out, sol);
  EXPECT_EQ(out.str(), "i,j,mass\n0,0,0.5\n1,1,0.5\n");
}

TEST(Monotone, GridShift) {
  std::vector<double> x, y;
  for (int i = 0; i < 101; ++i) {
    x.push_back(i / 100.0);
    y.push_back(1.0 + i / 100.0);
  }
  const auto m = monotone_map_1d(x, y, [](double d) { return d * d; });
  EXPECT_NEAR(m.cost, 1.0, 1e-12);
  for (double t : {0.0, 0.123, 0.5, 0.999, 1.0}) EXPECT_NEAR(m(t), t + 1.0, 1e-12);
}

TEST(Monotone, CapAnglesUnderAbsoluteCost) {
  // Uniform [0, pi/4] -> uniform [3pi/4, pi] in the polar angle alone.
  constexpr double pi = std::numbers::pi;
  std::vector<double> x, y;
  for (int i = 0; i <= 1000; ++i) {
    x.push_back(pi / 4 * i / 1000.0);
    y.push_back(3 * pi / 4 + pi / 4 * i / 1000.0);
  }
  const auto m = monotone_map_1d(x, y, [](double d) { return d; });
  EXPECT_NEAR(m(pi / 8), 7 * pi / 8, 1e-9);
  EXPECT_NEAR(m(pi / 4), pi, 1e-9);
}

TEST(Monotone, IdenticalSamples) {
  const std::vector<double> x{-1, 0, 2};
  const auto m = monotone_map_1d(x, x, [](double d) { return d * d; });
  EXPECT_EQ(m.cost, 0.0);
  EXPECT_EQ(m(0.5), 0.5);
}

TEST(Monotone, RejectsUnsorted) {
  try {
    monotone_map_1d({1, 0}, {0, 1}, [](double d) { return d; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotSorted);
  }
}

TEST(Gaussian, TranslationOnly) {
  const Eigen::VectorXd m = Eigen::Vector2d(2.0, -1.0);
  const auto s = gaussian_w2(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), m,
                             Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LT((s.A - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-12);
  EXPECT_NEAR(s.w2_squared, 5.0, 1e-12);
}

TEST(Gaussian, OneDimensionalAgainstQuantileMatching) {
  Eigen::VectorXd ma(1), mb(1);
  ma << 0.0;
  mb << 2.0;
  Eigen::MatrixXd ca(1, 1), cb(1, 1);
  ca << 1.0;
  cb << 4.0;
  const auto s = gaussian_w2(ma, ca, mb, cb);
  EXPECT_NEAR(s.A(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(s.w2_squared, 5.0, 1e-12);
  // Quantile points of N(0,1) and N(2,4) matched in order.
  std::normal_distribution<double> g;
  std::mt19937_64 eng(9);
  std::vector<double> x(100000);
  for (auto& v : x) v = g(eng);
  std::sort(x.begin(), x.end());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 + 2.0 * x[i];
  const auto mono = monotone_map_1d(x, y, [](double d) { return d * d; });
  for (double t : {-1.0, 0.0, 0.7}) EXPECT_NEAR(mono(t), s(Eigen::VectorXd::Constant(1, t))[0], 1e-3);
}

TEST(Gaussian, SameDistributionGivesIdentity) {
  std::mt19937_64 eng(10);
  const Eigen::MatrixXd c = random_spd(eng, 3);
  const Eigen::VectorXd m = Eigen::Vector3d(1, 2, 3);
  const auto s = gaussian_w2(m, c, m, c);
  EXPECT_LT((s.A - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-9);
  EXPECT_NEAR(s.w2_squared, 0.0, 1e-9);
}

TEST(Gaussian, PushesCovarianceOntoTarget) {
  std::mt19937_64 eng(11);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 5;
    const Eigen::MatrixXd ca = random_spd(eng, d), cb = random_spd(eng, d);
    const auto s = gaussian_w2(Eigen::VectorXd::Zero(d), ca, Eigen::VectorXd::Ones(d), cb);
    EXPECT_LE((s.A * ca * s.A - cb).norm() / cb.norm(), 1e-8);
    // A is symmetric positive definite, so the map is the gradient of a convex function.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.A);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Gaussian, RejectsIndefiniteCovariance) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    gaussian_w2(Eigen::VectorXd::Zero(2), bad, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPositiveDefinite);
  }
}

TEST(Gaussian, ApplyMatchesPointwise) {
  std::mt19937_64 eng(12);
  const auto s = gaussian_w2(Eigen::VectorXd::Zero(2), random_spd(eng, 2), Eigen::Vector2d(1, 1), random_spd(eng, 2));
  const Tensor x = random_points(eng, 5, 2);
  const Tensor y = s.apply(x);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Eigen::VectorXd p = s(x.row(i).transpose());
    EXPECT_NEAR((y.row(i).transpose() - p).norm(), 0.0, 1e-12);
  }
}

}  // namespace
}  // namespace monge::oracles
