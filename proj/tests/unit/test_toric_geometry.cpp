#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "toricq/errors.hpp"
#include "toricq/toric_geometry.hpp"

using namespace toricq;

namespace {

double fs_potential(double s) { return softplus(s); }

}  // namespace

TEST(SymplecticPotential, RejectsLossOfConvexity) {
  EXPECT_NO_THROW(SymplecticPotential({0.0, 0.0, 1.0}));
  EXPECT_THROW(SymplecticPotential({0.0, 0.0, -3.0}), PreconditionError);
  EXPECT_THROW(SymplecticPotential({NAN}), PreconditionError);
}

TEST(SymplecticPotential, DerivativesMatchFiniteDifferences) {
  const SymplecticPotential u({0.1, -0.2, 0.3, 0.25});
  const double h = 1e-5;
  for (double x : {0.1, 0.4, 0.77}) {
    const auto at = [](double y) { return MomentPoint{y, 1.0 - y}; };
    EXPECT_NEAR(u.first_derivative(at(x)), (u.value(x + h) - u.value(x - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(u.second_derivative(at(x)),
                (u.first_derivative(at(x + h)) - u.first_derivative(at(x - h))) / (2 * h), 1e-6);
    EXPECT_NEAR(u.third_derivative(at(x)),
                (u.second_derivative(at(x + h)) - u.second_derivative(at(x - h))) / (2 * h), 1e-4);
    EXPECT_NEAR(u.fourth_derivative(at(x)),
                (u.third_derivative(at(x + h)) - u.third_derivative(at(x - h))) / (2 * h), 1e-2);
  }
}

TEST(LegendreTransform, GuilleminGivesFubiniStudy) {
  const SymplecticPotential u = SymplecticPotential::guillemin();
  for (double s : {-700.0, -30.0, -1.0, 0.0, 2.0, 30.0, 700.0}) {
    const ConjugatePoint c = legendre_transform(u, s);
    EXPECT_NEAR(c.f, fs_potential(s), 1e-12 * std::max(1.0, std::abs(s)));
    const double x = 1.0 / (1.0 + std::exp(-s));
    EXPECT_NEAR(c.x.x, x, 1e-14);
    EXPECT_NEAR(c.logit, s, 1e-9 * std::max(1.0, std::abs(s)));
    if (std::abs(s) < 30) EXPECT_NEAR(c.fpp, x * (1 - x), 1e-14);
  }
  EXPECT_THROW(legendre_transform(u, INFINITY), DomainError);
}

TEST(LegendreTransform, ConjugateAtMomentInvertsRootFind) {
  const SymplecticPotential u({0.0, 0.4, 0.5, -0.2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s_dist(-25.0, 25.0);
  for (int i = 0; i < 50; ++i) {
    const double s = s_dist(rng);
    const ConjugatePoint c = legendre_transform(u, s);
    const ConjugatePoint back = conjugate_at_moment(u, c.x);
    EXPECT_NEAR(back.s, s, 1e-9);
    EXPECT_NEAR(back.f, c.f, 1e-9);
    // Young's inequality x s - u(x) <= f(s) on random x.
    const double x = std::uniform_real_distribution<double>(0.001, 0.999)(rng);
    EXPECT_LE(x * s - u.value(x), c.f + 1e-12);
  }
}

TEST(KaehlerPotentialLog, BoundaryLimits) {
  const KaehlerPotentialLog f(SymplecticPotential({0.3, 0.2, 0.1}));
  EXPECT_NEAR(f.value(-60.0), f.limit_minus_infinity(), 1e-12);
  EXPECT_NEAR(f.value(60.0) - 60.0, f.limit_plus_infinity_offset(), 1e-12);
}

TEST(MAGeodesicToric, VelocityMatchesFiniteDifference) {
  const MAGeodesicToric geo(SymplecticPotential::guillemin(), SymplecticPotential({0.0, 0.0, 0.5}));
  const double h = 1e-5;
  for (double t : {0.2, 0.5, 0.9})
    for (double s : {-5.0, 0.0, 3.0}) {
      const double fd =
          (ma_potential_at(geo, t + h).value(s) - ma_potential_at(geo, t - h).value(s)) / (2.0 * h);
      EXPECT_NEAR(velocity(geo, t, s), fd, 1e-8);
    }
}

TEST(MAGeodesicToric, TranslationFamilyVelocityIsConstant) {
  const MAGeodesicToric geo(SymplecticPotential::guillemin(), SymplecticPotential({0.7}));
  EXPECT_NEAR(geo.min_g(), 0.7, 1e-15);
  EXPECT_NEAR(geo.max_g(), 0.7, 1e-15);
  for (double s : {-10.0, 0.0, 10.0}) EXPECT_NEAR(velocity(geo, 0.3, s), -0.7, 1e-15);
}

TEST(MAGeodesicToric, ResidualVanishesAndStencilDomainIsChecked) {
  const MAGeodesicToric geo(SymplecticPotential({0.0, 0.1}), SymplecticPotential({0.0, 0.0, 0.5, 0.1}));
  for (double t : {0.1, 0.5, 0.9})
    for (double s : {-8.0, 0.0, 8.0}) EXPECT_LT(std::abs(geodesic_residual(geo, t, s)), 1e-6);
  EXPECT_THROW(geodesic_residual(geo, 0.0, 0.0), DomainError);
  EXPECT_THROW(ma_potential_at(geo, 1.5), DomainError);
}

TEST(LimitMeasure, QuadraticMomentsMatchAnalyticValues) {
  const MAGeodesicToric geo(SymplecticPotential::guillemin(), SymplecticPotential({0.0, 0.0, 0.5}));
  const ProbabilityMeasure mu = limit_measure(geo, 20000);
  EXPECT_NEAR(moment(mu, 1), 1.0 / 6.0, 1e-8);
  EXPECT_NEAR(moment(mu, 2), 1.0 / 20.0, 1e-8);
  EXPECT_NEAR(aubin_yau_energy(geo), 1.0 / 6.0, 1e-12);
  EXPECT_THROW(limit_measure(geo, 1), DomainError);
}

TEST(PushforwardAtT, IndependentOfTime) {
  const MAGeodesicToric geo(SymplecticPotential({0.0, 0.2}), SymplecticPotential({0.0, 0.0, 0.5, 0.2}));
  const ProbabilityMeasure m0 = pushforward_at_t(geo, 0.0, 2048);
  for (double t : {0.3, 0.8, 1.0}) {
    const ProbabilityMeasure mt = pushforward_at_t(geo, t, 2048);
    for (int p = 1; p <= 3; ++p) EXPECT_NEAR(moment(mt, p), moment(m0, p), 1e-9);
  }
  EXPECT_NEAR(moment(m0, 1), aubin_yau_energy(geo), 1e-8);
}

TEST(PotentialJson, RoundTripAndErrors) {
  const SymplecticPotential u({0.5, -0.25, 0.125});
  EXPECT_EQ(potential_from_json(to_json(u)), u);
  EXPECT_THROW(potential_from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(potential_from_json(nlohmann::json{{"poly", {"a"}}}), ConfigError);
}

TEST(LegendreTransform, InvolutionRecoversSymplecticPotential) {
  const MAGeodesicToric geo(SymplecticPotential({0.0, 0.1}), SymplecticPotential({0.0, 0.0, 0.5, -0.2}));
  const SymplecticPotential ut = geo.potential_at(0.4);
  std::vector<double> s_grid, f_grid;
  for (int i = 0; i <= 24000; ++i) {
    s_grid.push_back(-12.0 + 24.0 * i / 24000.0);
    f_grid.push_back(legendre_transform(ut, s_grid.back()).f);
  }
  for (double x = 0.05; x <= 0.95 + 1e-12; x += 0.05) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < s_grid.size(); ++i)
      if (x * s_grid[i] - f_grid[i] > x * s_grid[arg] - f_grid[arg]) arg = i;
    // The grid maximum is only accurate to O(h^2); refine inside the bracket.
    auto obj = [&](double s) { return x * s - legendre_transform(ut, s).f; };
    double a = s_grid[arg > 0 ? arg - 1 : 0], b = s_grid[std::min(arg + 1, s_grid.size() - 1)];
    for (int it = 0; it < 100; ++it) {
      const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (obj(m1) < obj(m2)) a = m1; else b = m2;
    }
    EXPECT_NEAR(obj(0.5 * (a + b)), ut.value(x), 1e-8) << "x=" << x;
  }
}

TEST(LegendreTransform, DerivativeOfFIsMomentMap) {
  // Sixth-order central difference of f against x*(s) at quadrature images.
  const KaehlerPotentialLog f(SymplecticPotential({0.0, 0.3, 0.5, -0.1}));
  const double h = 1e-2;
  for (const UnitNode& node : gauss_legendre_unit(24)) {
    const double s = conjugate_at_moment(f.symplectic(), node.point).s;
    if (std::abs(s) > 20.0) continue;
    const double d = (45.0 * (f.value(s + h) - f.value(s - h)) - 9.0 * (f.value(s + 2 * h) - f.value(s - 2 * h)) +
                      (f.value(s + 3 * h) - f.value(s - 3 * h))) /
                     (60.0 * h);
    EXPECT_NEAR(d, f.derivative(s), 1e-10) << "s=" << s;
  }
}

TEST(PushforwardAtT, IntegralsOfTestFunctionsAreConstant) {
  const MAGeodesicToric geo(SymplecticPotential::guillemin(), SymplecticPotential({0.0, 0.0, 0.5}));
  auto integral = [](const ProbabilityMeasure& m, double (*fn)(double)) {
    double acc = 0.0;
    for (const Atom& a : m.atoms()) acc += a.weight * fn(a.location);
    return acc;
  };
  double (*tests[])(double) = {[](double y) { return y; }, [](double y) { return y * y; },
                               [](double y) { return y * y * y; }, [](double y) { return std::exp(y); }};
  const ProbabilityMeasure m0 = pushforward_at_t(geo, 0.0, 4096);
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    const ProbabilityMeasure mt = pushforward_at_t(geo, t, 4096);
    for (auto fn : tests) EXPECT_NEAR(integral(mt, fn), integral(m0, fn), 1e-6);
  }
}

TEST(MAGeodesicToric, VelocityPinching) {
  const MAGeodesicToric geo(SymplecticPotential({0.0, -0.2}), SymplecticPotential({0.0, 0.4, 0.5, -0.3}));
  for (double t : {0.0, 0.3, 1.0})
    for (double s = -40.0; s <= 40.0; s += 0.5) {
      const double v = velocity(geo, t, s);
      EXPECT_GE(v, -geo.max_g() - 1e-12);
      EXPECT_LE(v, -geo.min_g() + 1e-12);
    }
}
