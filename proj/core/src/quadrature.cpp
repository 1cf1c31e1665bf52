#include "toricq/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <map>
#include <mutex>

#include "toricq/errors.hpp"

namespace toricq {

MomentPoint MomentPoint::from_logit(double y) noexcept {
  // x = 1 / (1 + e^{-y}); each side computed from the branch that does not cancel.
  if (y >= 0.0) {
    const double e = std::exp(-y);
    return {1.0 / (1.0 + e), e / (1.0 + e)};
  }
  const double e = std::exp(y);
  return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

namespace {

std::vector<UnitNode> compute_gauss_legendre(int n) {
  std::vector<UnitNode> nodes(static_cast<std::size_t>(n));
  const double nd = static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    double theta = kPi * (i + 0.75) / (nd + 0.5);
    double p_n = 0.0, p_nm1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double t = std::cos(theta);
      double p0 = 1.0, p1 = t;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * t * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      p_n = n == 0 ? 1.0 : p1;
      p_nm1 = n == 0 ? 0.0 : p0;
      if (n == 1) {
        p_n = t;
        p_nm1 = 1.0;
      }
      const double dp_dtheta = -nd * (p_nm1 - t * p_n) / std::sin(theta);
      const double step = p_n / dp_dtheta;
      theta -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double t = std::cos(theta);
    const double denom = nd * (p_nm1 - t * p_n);
    const double sin_t = std::sin(theta);
    const double w = 2.0 * sin_t * sin_t / (denom * denom);
    const double half = 0.5 * theta;
    // t = cos(theta) is descending in i; x = (1 - t)/2 ascends.
    nodes[static_cast<std::size_t>(i)] = {{std::sin(half) * std::sin(half), std::cos(half) * std::cos(half)},
                                          0.5 * w};
  }
  return nodes;
}

}  // namespace

const std::vector<UnitNode>& gauss_legendre_unit(int n) {
  if (n < 1) throw DomainError("gauss_legendre_unit: node count must be positive");
  static std::mutex mutex;
  static std::map<int, std::vector<UnitNode>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

std::vector<LineNode> composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1 || order < 1) throw DomainError("composite_gauss_legendre: bad panel layout");
  const auto& base = gauss_legendre_unit(order);
  std::vector<LineNode> out;
  out.reserve(static_cast<std::size_t>(panels) * base.size());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = a + h * p;
    for (const auto& node : base) out.push_back({left + h * node.point.x, h * node.weight});
  }
  return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &error);
  return value;
}

double log_sum_exp(std::span<const double> values) noexcept {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace toricq
