#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace toricq {

/// A point of the moment interval carried together with its complement so that
/// both x and 1 - x keep full relative precision near the endpoints.
struct MomentPoint {
  double x = 0.5;
  double xc = 0.5;  // 1 - x

  /// From the logit y = log(x / (1 - x)).
  static MomentPoint from_logit(double y) noexcept;
  double logit() const noexcept { return std::log(x) - std::log(xc); }
};

/// Gauss-Legendre node on [0,1].
struct UnitNode {
  MomentPoint point;
  double weight = 0.0;
};

/// n-point Gauss-Legendre rule on [0,1]. Nodes are computed in the angle
/// variable (x = sin^2(theta/2)) so that x and 1 - x are both accurate.
/// Results are memoized per n; the cache is guarded and safe to share.
const std::vector<UnitNode>& gauss_legendre_unit(int n);

struct LineNode {
  double t = 0.0;
  double weight = 0.0;
};

/// Composite Gauss-Legendre rule on [a,b] with `panels` panels of `order` nodes.
std::vector<LineNode> composite_gauss_legendre(double a, double b, int panels, int order);

/// Adaptive Gauss-Kronrod integral of a smooth function on [a,b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

/// log(sum_i exp(v_i)); -inf for an empty range.
double log_sum_exp(std::span<const double> values) noexcept;

/// Numerically stable log(1 + e^y).
inline double softplus(double y) noexcept {
  return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace toricq
