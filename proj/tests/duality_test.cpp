#include "monge/duality.hpp"
#include "monge/oracles.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace monge::duality {
namespace {

using monge::testing::linear_potential;
using monge::testing::random_points;
using monge::testing::shift_map;

nn::Model random_potential(int dim, std::uint64_t seed) {
  nn::Model f;
  f.spec = {dim, 1, {16, 16}, nn::Activation::kTanh, false, 0.0, 0};
  f.params = nn::init_params(f.spec, seed);
  return f;
}

TEST(CTransform, ZeroPotentialQuadratic) {
  std::mt19937_64 eng(1);
  const Tensor x = random_points(eng, 5, 2);
  const Tensor cand = random_points(eng, 8, 2);
  const auto r = c_transform_minus_batch(linear_potential({0, 0}), CostSpec::quadratic(2), x, cand, {}, &x);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(r.values[i], 0.0, 1e-12);
}

TEST(CTransform, LinearPotentialClosedForm) {
  // sup_y <a, y> - |x - y|^2 is attained at y = x + a/2 with value <a, x> + |a|^2 / 4.
  const std::vector<double> a{0.8, -0.4};
  const auto f = linear_potential(a);
  std::mt19937_64 eng(2);
  const Tensor x = random_points(eng, 10, 2);
  const Tensor cand = random_points(eng, 16, 2, -3, 3);
  CTransformConfig cfg;
  cfg.ascent_steps = 200;
  const auto r = c_transform_minus_batch(f, CostSpec::quadratic(2), x, cand, cfg);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double expect = a[0] * x(i, 0) + a[1] * x(i, 1) + (a[0] * a[0] + a[1] * a[1]) / 4.0;
    EXPECT_NEAR(r.values[i], expect, 1e-8);
    EXPECT_NEAR(r.argmax(i, 0), x(i, 0) + a[0] / 2, 1e-4);
    EXPECT_NEAR(r.argmax(i, 1), x(i, 1) + a[1] / 2, 1e-4);
  }
}

TEST(CTransform, LinearPotentialAgainstGridSearch) {
  const auto f = linear_potential({1.0});
  const Tensor x = Tensor::Constant(1, 1, 0.3);
  double best = -1e300;
  for (int k = -4000; k <= 4000; ++k) {
    const double y = k / 1000.0;
    best = std::max(best, y - (0.3 - y) * (0.3 - y));
  }
  Tensor cand(1, 1);
  cand << -2.0;
  CTransformConfig cfg;
  cfg.ascent_steps = 200;
  EXPECT_NEAR(c_transform_minus_batch(f, CostSpec::quadratic(1), x, cand, cfg).values[0], best, 1e-6);
}

TEST(CTransform, NoAscentReturnsBestCandidate) {
  const auto f = linear_potential({1.0});
  Tensor x(1, 1), cand(3, 1);
  x << 0.0;
  cand << -1.0, 0.4, 2.0;
  CTransformConfig cfg;
  cfg.ascent_steps = 0;
  const auto r = c_transform_minus_batch(f, CostSpec::quadratic(1), x, cand, cfg);
  // Candidate values: -2, 0.24, -2.
  EXPECT_DOUBLE_EQ(r.values[0], 0.4 - 0.16);
  EXPECT_DOUBLE_EQ(r.argmax(0, 0), 0.4);
}

TEST(CTransform, DominatesEveryCandidate) {
  std::mt19937_64 eng(3);
  for (const CostSpec& c : {CostSpec::quadratic(2), CostSpec::neg_cosine(2)}) {
    const auto f = random_potential(2, 11);
    const Tensor x = random_points(eng, 30, 2, 0.5, 2.0), cand = random_points(eng, 40, 2, 0.5, 2.0);
    const auto r = c_transform_minus_batch(f, c, x, cand, {});
    const Tensor fc = f(cand);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < cand.rows(); ++j)
        EXPECT_GE(r.values[i], fc(j, 0) - eval_cost(c, row_span(x, i), row_span(cand, j)));
  }
}

TEST(CTransform, RejectsMismatchedInputs) {
  EXPECT_THROW(c_transform_minus_batch(linear_potential({0, 0}), CostSpec::quadratic(2), Tensor::Zero(1, 2),
                                       Tensor::Zero(0, 2), {}),
               Error);
  EXPECT_THROW(c_transform_minus_batch(linear_potential({0, 0}), CostSpec::quadratic(2), Tensor::Zero(1, 3),
                                       Tensor::Zero(1, 2), {}),
               Error);
}

TEST(Gaps, E1ZeroForIdentityAndZeroPotential) {
  std::mt19937_64 eng(4);
  const Tensor x = random_points(eng, 20, 2);
  EXPECT_NEAR(gap_e1(shift_map({0, 0}), linear_potential({0, 0}), CostSpec::quadratic(2), x, x, {}), 0.0, 1e-12);
}

TEST(Gaps, E1OfFixedShiftIsSquaredNorm) {
  std::mt19937_64 eng(5);
  const Tensor x = random_points(eng, 20, 2);
  const Tensor cand = random_points(eng, 20, 2);
  const double e1 = gap_e1(shift_map({0.3, -0.4}), linear_potential({0, 0}), CostSpec::quadratic(2), x, cand, {});
  EXPECT_NEAR(e1, 0.25, 1e-6);
}

TEST(Gaps, E1NonNegativeForRandomPairs) {
  std::mt19937_64 eng(6);
  for (std::uint64_t s = 0; s < 10; ++s) {
    TrainedMap t;
    t.spec = {2, 2, {8}, nn::Activation::kPReLU, true, 0.0, 0};
    t.params = nn::init_params(t.spec, s);
    const Tensor x = random_points(eng, 25, 2), y = random_points(eng, 25, 2);
    EXPECT_GE(gap_e1(t, random_potential(2, 100 + s), CostSpec::quadratic(2), x, y, {}), 0.0);
  }
}

TEST(Gaps, E2OfZeroPotentialIsOracleCost) {
  std::mt19937_64 eng(7);
  const Tensor x = random_points(eng, 16, 2), y = random_points(eng, 16, 2);
  const double oracle = oracles::discrete_ot_exact(x, y, CostSpec::quadratic(2)).cost;
  EXPECT_NEAR(gap_e2(linear_potential({0, 0}), CostSpec::quadratic(2), x, y, oracle, {}), oracle, 1e-9);
}

TEST(Gaps, E2NearZeroForKantorovichPotentialOfShift) {
  // U[0,1] -> U[1,2]: f(y) = 2y is optimal, f^{c,-}(x) = 2x + 1.
  Tensor x(200, 1), y(200, 1);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = (i + 0.5) / 200.0;
    y(i, 0) = 1.0 + (i + 0.5) / 200.0;
  }
  const double oracle = oracles::discrete_ot_exact(x, y, CostSpec::quadratic(1)).cost;
  EXPECT_NEAR(oracle, 1.0, 1e-12);
  EXPECT_NEAR(gap_e2(linear_potential({2.0}), CostSpec::quadratic(1), x, y, oracle, {}), 0.0, 0.02);
}

TEST(Gaps, WeakDualityOnRandomPotentials) {
  std::mt19937_64 eng(8);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor x = random_points(eng, 30, 2), y = random_points(eng, 30, 2, -0.5, 1.5);
    const auto c = CostSpec::quadratic(2);
    const double oracle = oracles::discrete_ot_exact(x, y, c).cost;
    const auto r = evaluate_duality(shift_map({0, 0}), random_potential(2, s), c, x, y, oracle);
    EXPECT_LE(r.dual_value, oracle + 2 * kGapTolerance);
    EXPECT_GE(r.e2, -1e-12);
    EXPECT_GE(r.e1, 0.0);
  }
}

TEST(Gaps, ReportFlagsCostsWithoutTheHessianAssumption) {
  std::mt19937_64 eng(9);
  const Tensor x = random_points(eng, 8, 2, 0.5, 1.0), y = random_points(eng, 8, 2, 0.5, 1.0);
  const auto c = CostSpec::neg_cosine(2);
  const double oracle = oracles::discrete_ot_exact(x, y, c).cost;
  EXPECT_TRUE(evaluate_duality(shift_map({0, 0}), random_potential(2, 1), c, x, y, oracle).assumption_unmet);
  const auto q = CostSpec::quadratic(2);
  const double oq = oracles::discrete_ot_exact(x, y, q).cost;
  EXPECT_FALSE(evaluate_duality(shift_map({0, 0}), random_potential(2, 1), q, x, y, oq).assumption_unmet);
}

TEST(Gaps, ReportJsonRoundTrip) {
  DualityReport r;
  r.e1 = 0.25;
  r.e2 = 0.5;
  r.bound = error_bound(0.25, 0.5);
  r.oracle_cost = 2;
  r.dual_value = 1.5;
  r.n_samples = 64;
  r.assumption_unmet = true;
  r.multimodal_fraction = 0.125;
  const auto back = duality_report_from_json(to_json(r));
  EXPECT_EQ(back.e1, r.e1);
  EXPECT_EQ(back.e2, r.e2);
  EXPECT_EQ(back.bound, r.bound);
  EXPECT_EQ(back.n_samples, 64);
  EXPECT_TRUE(back.assumption_unmet);
  EXPECT_EQ(back.multimodal_fraction, 0.125);
}

TEST(Bound, Examples) {
  EXPECT_EQ(error_bound(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(error_bound(0.5, 0.0), 1.0);
}

TEST(Bound, NegativeSumIsAnError) {
  try {
    error_bound(-0.5, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeGapSum);
  }
}

}  // namespace
}  // namespace monge::duality
