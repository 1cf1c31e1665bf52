#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <string>

#include "toricq/polynomial.hpp"
#include "toricq/quadrature.hpp"

namespace toricq {

/// Bounded function on CP^1 written in the moment coordinate x of a reference
/// metric and the angle theta. Invariant symbols ignore theta.
struct Symbol {
  std::function<double(const MomentPoint&, double)> fn;
  bool invariant = true;
  /// Largest angular frequency the symbol carries (0 when invariant).
  int angular_degree = 0;
  std::string descriptor;

  double operator()(const MomentPoint& p, double theta = 0.0) const { return fn(p, theta); }

  static Symbol constant(double c);
  static Symbol radial(std::function<double(const MomentPoint&)> f, std::string descriptor);
  static Symbol polynomial(const Polynomial& p);
  /// amplitude(x) * cos(m theta)
  static Symbol angular(std::function<double(const MomentPoint&)> amplitude, int m,
                        std::string descriptor);

  /// Parses a descriptor: a shorthand string ("x", "x^2", "x^3", "exp(x)",
  /// "sin(pi x)", "sin(2 pi x)", "|x-1/2|", "1") or an object
  /// {"kind": "poly"|"sin_pi"|"abs"|"constant", ...}.
  static Symbol from_json(const nlohmann::json& j);
};

Symbol operator+(const Symbol& a, const Symbol& b);
Symbol operator*(const Symbol& a, const Symbol& b);
Symbol operator*(double c, const Symbol& a);

/// Adaptive integral of an invariant symbol over the moment interval.
double moment_integral(const Symbol& xi);

/// Sup of |symbol| over a fine (x, theta) grid.
double sup_norm(const Symbol& xi);

}  // namespace toricq
