#pragma once

#include <span>
#include <vector>

namespace toricq {

/// Dense real polynomial c0 + c1 x + ... + cn x^n.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  double operator()(double x) const noexcept;
  Polynomial derivative() const;

  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept;

  /// Upper bound for |p(x)| on [0,1] (sum of absolute coefficients).
  double abs_bound_unit() const noexcept;

  /// Exact min and max over [0,1] (critical points located by bracketing).
  std::pair<double, double> range_unit() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

 private:
  void trim();
  std::vector<double> coeffs_;
};

}  // namespace toricq
