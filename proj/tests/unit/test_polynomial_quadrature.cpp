#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "toricq/errors.hpp"
#include "toricq/polynomial.hpp"
#include "toricq/quadrature.hpp"

using namespace toricq;

TEST(Polynomial, EvaluatesAndDifferentiates) {
  const Polynomial p({1.0, -2.0, 0.0, 3.0});
  EXPECT_DOUBLE_EQ(p(0.0), 1.0);
  EXPECT_DOUBLE_EQ(p(2.0), 1.0 - 4.0 + 24.0);
  const Polynomial dp = p.derivative();
  EXPECT_DOUBLE_EQ(dp(2.0), -2.0 + 9.0 * 4.0);
  EXPECT_EQ(dp.degree(), 2);
  EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
}

TEST(Polynomial, RangeOnUnitIntervalMatchesDenseScan) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(5);
    for (double& v : c) v = coef(rng);
    const Polynomial p(c);
    double lo = p(0.0), hi = p(0.0);
    for (int i = 0; i <= 200000; ++i) {
      const double v = p(i / 200000.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const auto [mn, mx] = p.range_unit();
    EXPECT_LE(mn, lo + 1e-12);
    EXPECT_GE(mx, hi - 1e-12);
    EXPECT_NEAR(mn, lo, 1e-8);
    EXPECT_NEAR(mx, hi, 1e-8);
    EXPECT_GE(p.abs_bound_unit(), std::max(std::abs(mn), std::abs(mx)));
  }
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  for (int n : {1, 4, 17, 64}) {
    const auto& rule = gauss_legendre_unit(n);
    ASSERT_EQ(static_cast<int>(rule.size()), n);
    for (int deg = 0; deg <= 2 * n - 1; deg += std::max(1, n / 4)) {
      double acc = 0.0;
      for (const UnitNode& node : rule) acc += node.weight * std::pow(node.point.x, deg);
      EXPECT_NEAR(acc, 1.0 / (deg + 1), 1e-14) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(GaussLegendre, ComplementIsAccurateNearEndpoints) {
  for (const UnitNode& node : gauss_legendre_unit(200)) {
    EXPECT_GT(node.point.x, 0.0);
    EXPECT_GT(node.point.xc, 0.0);
    EXPECT_NEAR(node.point.x + node.point.xc, 1.0, 1e-15);
  }
  EXPECT_THROW(gauss_legendre_unit(0), DomainError);
}

TEST(CompositeGaussLegendre, IntegratesSmoothFunction) {
  double acc = 0.0;
  for (const LineNode& n : composite_gauss_legendre(-1.0, 2.0, 8, 10)) acc += n.weight * std::exp(n.t);
  EXPECT_NEAR(acc, std::exp(2.0) - std::exp(-1.0), 1e-13);
}

TEST(IntegrateAdaptive, MatchesClosedForms) {
  EXPECT_NEAR(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi), 2.0, 1e-10);
  EXPECT_NEAR(integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0), 1.0 / 3.0, 1e-12);
}

TEST(LogSumExp, StableForLargeArguments) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> w{-1000.0, 0.0};
  EXPECT_NEAR(log_sum_exp(w), 0.0, 1e-15);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kNegInf);
}

TEST(Softplus, MatchesDirectFormula) {
  for (double y : {-30.0, -1.0, 0.0, 2.5, 40.0}) EXPECT_NEAR(softplus(y), std::log1p(std::exp(y)), 1e-12);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
}

TEST(MomentPoint, FromLogitKeepsComplement) {
  const MomentPoint p = MomentPoint::from_logit(-40.0);
  EXPECT_NEAR(p.x, std::exp(-40.0), 1e-30);
  EXPECT_NEAR(p.logit(), -40.0, 1e-12);
}
