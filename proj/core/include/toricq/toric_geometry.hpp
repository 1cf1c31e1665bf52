#pragma once

// Exact toric model: S^1-invariant metrics on O(1) -> CP^1 in Legendre-dual form.
//
// A metric is encoded by its symplectic potential u on the moment interval
// [0,1], u = x log x + (1-x) log(1-x) + v(x) with v a polynomial. The Kaehler
// potential in the log coordinate s = log|z|^2 is the convex conjugate
// f(s) = sup_x (x s - u(x)). Geodesics are linear in u, so every quantity
// along the Monge-Ampere geodesic is available in closed form up to a
// one-dimensional monotone root-find.

#include <nlohmann/json.hpp>
#include <utility>
#include <vector>

#include "toricq/measures.hpp"
#include "toricq/polynomial.hpp"
#include "toricq/quadrature.hpp"

namespace toricq {

class SymplecticPotential {
 public:
  /// Guillemin potential plus the polynomial correction with the given
  /// coefficients. Throws PreconditionError unless u'' > 0 on a dense grid.
  explicit SymplecticPotential(std::vector<double> poly_coeffs = {});

  static SymplecticPotential guillemin() { return SymplecticPotential(); }
  /// (1 - t) a + t b, validated like any other potential.
  static SymplecticPotential interpolate(const SymplecticPotential& a, const SymplecticPotential& b,
                                         double t);

  const Polynomial& correction() const noexcept { return v_; }
  const Polynomial& correction_derivative() const noexcept { return dv_; }

  double value(const MomentPoint& p) const noexcept;
  double value(double x) const noexcept { return value(MomentPoint{x, 1.0 - x}); }
  double first_derivative(const MomentPoint& p) const noexcept;
  double second_derivative(const MomentPoint& p) const noexcept;
  double third_derivative(const MomentPoint& p) const noexcept;
  double fourth_derivative(const MomentPoint& p) const noexcept;
  /// x(1-x) u''(x) = 1 + x(1-x) v''(x); strictly positive.
  double hessian_factor(const MomentPoint& p) const noexcept;

  /// Bound on |v'| over [0,1]; brackets the logit of the Legendre maximizer.
  double slope_bound() const noexcept { return slope_bound_; }

  bool operator==(const SymplecticPotential& o) const noexcept { return v_ == o.v_; }

 private:
  Polynomial v_, dv_, d2v_, d3v_, d4v_;
  double slope_bound_ = 0.0;
};

/// Legendre data of u at one value of s.
struct ConjugatePoint {
  double s = 0.0;
  double f = 0.0;         // f(s) = x s - u(x)
  MomentPoint x;          // maximizer x*(s) = f'(s)
  double logit = 0.0;     // log(x / (1 - x))
  double fpp = 0.0;       // f''(s) = 1 / u''(x)
  double log_fpp = 0.0;
};

/// Unique maximizer of x s - u(x) by bisection-safeguarded Newton on the logit,
/// tolerance 1e-12, at most 200 iterations. Throws NumericalFailure (carrying
/// s in the message) on non-convergence, PreconditionError on lost convexity.
ConjugatePoint legendre_transform(const SymplecticPotential& u, double s);

/// Legendre data at the point whose moment coordinate is p (no root-find).
ConjugatePoint conjugate_at_moment(const SymplecticPotential& u, const MomentPoint& p) noexcept;

/// Interval [s_min, s_max] on which f'(s) ranges over [eps, 1 - eps].
std::pair<double, double> truncated_s_interval(const SymplecticPotential& u, double eps = 1e-8);

/// Kaehler potential f in the log coordinate, f'(s) in (0,1), f'' > 0, and
/// f(s) - max(0, s) bounded (tending to -v(0) at -inf and -v(1) at +inf).
class KaehlerPotentialLog {
 public:
  explicit KaehlerPotentialLog(SymplecticPotential u) : u_(std::move(u)) {}

  double value(double s) const { return legendre_transform(u_, s).f; }
  double derivative(double s) const { return legendre_transform(u_, s).x.x; }
  double second_derivative(double s) const { return legendre_transform(u_, s).fpp; }
  ConjugatePoint evaluate(double s) const { return legendre_transform(u_, s); }

  double limit_minus_infinity() const noexcept { return -u_.correction()(0.0); }
  double limit_plus_infinity_offset() const noexcept { return -u_.correction()(1.0); }

  const SymplecticPotential& symplectic() const noexcept { return u_; }

 private:
  SymplecticPotential u_;
};

/// Monge-Ampere geodesic between two toric metrics: u_t = (1-t) u0 + t u1.
class MAGeodesicToric {
 public:
  MAGeodesicToric(SymplecticPotential u0, SymplecticPotential u1);

  const SymplecticPotential& u0() const noexcept { return u0_; }
  const SymplecticPotential& u1() const noexcept { return u1_; }
  /// g = u1 - u0 (a polynomial: the singular parts cancel).
  const Polynomial& g() const noexcept { return g_; }
  double min_g() const noexcept { return min_g_; }
  double max_g() const noexcept { return max_g_; }

  /// Symplectic potential of the geodesic at t in [0,1].
  SymplecticPotential potential_at(double t) const;

 private:
  SymplecticPotential u0_, u1_;
  Polynomial g_;
  double min_g_ = 0.0, max_g_ = 0.0;
};

void check_unit_time(double t, const char* who);

KaehlerPotentialLog ma_potential_at(const MAGeodesicToric& geo, double t);
double moment_map(const MAGeodesicToric& geo, double t, double s);
/// d/dt f_t(s) = -g(x_t*(s)).
double velocity(const MAGeodesicToric& geo, double t, double s);

/// Step of the t-stencil used by geodesic_residual.
inline constexpr double kResidualStep = 1e-3;
/// f_tt - (f_t')^2 / f'' by fourth-order central differences in t.
/// Requires t in [2 delta, 1 - 2 delta]; DomainError otherwise.
double geodesic_residual(const MAGeodesicToric& geo, double t, double s);

/// g pushed forward from Lebesgue measure on [0,1], atoms at cell midpoints.
ProbabilityMeasure limit_measure(const MAGeodesicToric& geo, int grid_size);

/// (-velocity)_* of the normalized volume at time t, by composite Gauss-Legendre
/// quadrature in s over the interval where f_t' lies in [1e-8, 1 - 1e-8].
ProbabilityMeasure pushforward_at_t(const MAGeodesicToric& geo, double t, int grid_size);

/// Integral of g over [0,1] (constant first moment of the pushforward).
double aubin_yau_energy(const MAGeodesicToric& geo);

nlohmann::json to_json(const SymplecticPotential& u);
SymplecticPotential potential_from_json(const nlohmann::json& j);

}  // namespace toricq
