#include "toricq/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace toricq {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(d));
}

bool Polynomial::is_zero() const noexcept { return coeffs_.empty(); }

double Polynomial::abs_bound_unit() const noexcept {
  double b = 0.0;
  for (double c : coeffs_) b += std::abs(c);
  return b;
}

std::pair<double, double> Polynomial::range_unit() const {
  const Polynomial dp = derivative();
  double lo = std::min((*this)(0.0), (*this)(1.0));
  double hi = std::max((*this)(0.0), (*this)(1.0));
  if (dp.is_zero()) return {lo, hi};

  // Sign changes of p' on a fine partition, refined by bisection. Polynomials used
  // here have low degree so 4096 cells separate all critical points.
  constexpr int cells = 4096;
  double a = 0.0;
  double fa = dp(a);
  for (int i = 1; i <= cells; ++i) {
    const double b = static_cast<double>(i) / cells;
    const double fb = dp(b);
    double root = -1.0;
    if (fa == 0.0) {
      root = a;
    } else if (fa * fb < 0.0) {
      double l = a, r = b, fl = fa;
      for (int it = 0; it < 200 && r - l > 1e-16; ++it) {
        const double m = 0.5 * (l + r);
        const double fm = dp(m);
        if ((fm < 0.0) == (fl < 0.0)) {
          l = m;
          fl = fm;
        } else {
          r = m;
        }
      }
      root = 0.5 * (l + r);
    }
    if (root >= 0.0) {
      const double v = (*this)(root);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    a = b;
    fa = fb;
  }
  return {lo, hi};
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(double s, const Polynomial& p) {
  std::vector<double> c = p.coeffs_;
  for (double& v : c) v *= s;
  return Polynomial(std::move(c));
}

}  // namespace toricq
