#include "toricq/toric_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "toricq/errors.hpp"

namespace toricq {

namespace {

constexpr int kConvexityGrid = 4001;
constexpr int kMaxNewtonIterations = 200;
constexpr double kNewtonTolerance = 1e-12;

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

SymplecticPotential::SymplecticPotential(std::vector<double> poly_coeffs)
    : v_(std::move(poly_coeffs)) {
  dv_ = v_.derivative();
  d2v_ = dv_.derivative();
  d3v_ = d2v_.derivative();
  d4v_ = d3v_.derivative();
  slope_bound_ = dv_.abs_bound_unit();
  for (double c : v_.coeffs())
    if (!std::isfinite(c)) throw PreconditionError("SymplecticPotential: non-finite coefficient");
  for (int i = 1; i < kConvexityGrid; ++i) {
    const double x = static_cast<double>(i) / kConvexityGrid;
    if (!(hessian_factor({x, 1.0 - x}) > 0.0))
      throw PreconditionError("SymplecticPotential: u'' is not positive at x = " + std::to_string(x));
  }
}

SymplecticPotential SymplecticPotential::interpolate(const SymplecticPotential& a,
                                                     const SymplecticPotential& b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return SymplecticPotential(((1.0 - t) * a.v_ + t * b.v_).coeffs());
}

double SymplecticPotential::value(const MomentPoint& p) const noexcept {
  return xlogx(p.x) + xlogx(p.xc) + v_(p.x);
}

double SymplecticPotential::first_derivative(const MomentPoint& p) const noexcept {
  return std::log(p.x) - std::log(p.xc) + dv_(p.x);
}

double SymplecticPotential::second_derivative(const MomentPoint& p) const noexcept {
  return 1.0 / (p.x * p.xc) + d2v_(p.x);
}

double SymplecticPotential::third_derivative(const MomentPoint& p) const noexcept {
  return -1.0 / (p.x * p.x) + 1.0 / (p.xc * p.xc) + d3v_(p.x);
}

double SymplecticPotential::fourth_derivative(const MomentPoint& p) const noexcept {
  return 2.0 / (p.x * p.x * p.x) + 2.0 / (p.xc * p.xc * p.xc) + d4v_(p.x);
}

double SymplecticPotential::hessian_factor(const MomentPoint& p) const noexcept {
  return 1.0 + p.x * p.xc * d2v_(p.x);
}

namespace {

ConjugatePoint assemble_conjugate(const SymplecticPotential& u, double s, double y,
                                  const MomentPoint& p) noexcept {
  ConjugatePoint c;
  c.s = s;
  c.x = p;
  c.logit = y;
  // x s - u(x) rewritten with log x = y - softplus(y), log(1-x) = -softplus(y).
  c.f = softplus(y) + p.x * (s - y) - u.correction()(p.x);
  const double h = u.hessian_factor(p);
  c.fpp = p.x * p.xc / h;
  c.log_fpp = -softplus(-y) - softplus(y) - std::log(h);
  return c;
}

}  // namespace

ConjugatePoint legendre_transform(const SymplecticPotential& u, double s) {
  if (!std::isfinite(s)) throw DomainError("legendre_transform: s must be finite");
  const Polynomial& dv = u.correction_derivative();
  // u'(x) = y + v'(x) with y the logit, so the root satisfies |y - s| <= sup|v'|.
  double lo = s - u.slope_bound() - 1.0;
  double hi = s + u.slope_bound() + 1.0;
  double y = std::clamp(s - dv(0.5), lo, hi);
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const MomentPoint p = MomentPoint::from_logit(y);
    const double h = y + dv(p.x) - s;
    const double slope = u.hessian_factor(p);
    if (!(slope > 0.0))
      throw PreconditionError("legendre_transform: potential is not strictly convex");
    if (h == 0.0) return assemble_conjugate(u, s, y, p);
    if (h > 0.0)
      hi = y;
    else
      lo = y;
    double next = y - h / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - y;
    y = next;
    if (std::abs(step) <= kNewtonTolerance || hi - lo <= 1e-15 * std::max(1.0, std::abs(y)))
      return assemble_conjugate(u, s, y, MomentPoint::from_logit(y));
  }
  throw NumericalFailure("legendre_transform: no convergence at s = " + std::to_string(s));
}

ConjugatePoint conjugate_at_moment(const SymplecticPotential& u, const MomentPoint& p) noexcept {
  const double y = p.logit();
  const double s = y + u.correction_derivative()(p.x);
  return assemble_conjugate(u, s, y, p);
}

std::pair<double, double> truncated_s_interval(const SymplecticPotential& u, double eps) {
  return {u.first_derivative({eps, 1.0 - eps}), u.first_derivative({1.0 - eps, eps})};
}

MAGeodesicToric::MAGeodesicToric(SymplecticPotential u0, SymplecticPotential u1)
    : u0_(std::move(u0)), u1_(std::move(u1)) {
  g_ = u1_.correction() - u0_.correction();
  std::tie(min_g_, max_g_) = g_.range_unit();
}

void check_unit_time(double t, const char* who) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError(std::string(who) + ": t must lie in [0,1]");
}

SymplecticPotential MAGeodesicToric::potential_at(double t) const {
  check_unit_time(t, "potential_at");
  return SymplecticPotential::interpolate(u0_, u1_, t);
}

KaehlerPotentialLog ma_potential_at(const MAGeodesicToric& geo, double t) {
  return KaehlerPotentialLog(geo.potential_at(t));
}

double moment_map(const MAGeodesicToric& geo, double t, double s) {
  return legendre_transform(geo.potential_at(t), s).x.x;
}

double velocity(const MAGeodesicToric& geo, double t, double s) {
  return -geo.g()(moment_map(geo, t, s));
}

double geodesic_residual(const MAGeodesicToric& geo, double t, double s) {
  constexpr double d = kResidualStep;
  if (!(t >= 2.0 * d && t <= 1.0 - 2.0 * d))
    throw DomainError("geodesic_residual: t too close to an endpoint for the stencil");
  ConjugatePoint c[5];
  for (int i = 0; i < 5; ++i) c[i] = legendre_transform(geo.potential_at(t + (i - 2) * d), s);
  const double f_tt = (-c[0].f + 16.0 * c[1].f - 30.0 * c[2].f + 16.0 * c[3].f - c[4].f) / (12.0 * d * d);
  const double fs_t = (c[0].x.x - 8.0 * c[1].x.x + 8.0 * c[3].x.x - c[4].x.x) / (12.0 * d);
  return f_tt - fs_t * fs_t / c[2].fpp;
}

ProbabilityMeasure limit_measure(const MAGeodesicToric& geo, int grid_size) {
  if (grid_size < 2) throw DomainError("limit_measure: grid_size must be at least 2");
  std::vector<Atom> atoms(static_cast<std::size_t>(grid_size));
  const double w = 1.0 / grid_size;
  for (int m = 0; m < grid_size; ++m) atoms[static_cast<std::size_t>(m)] = {geo.g()((m + 0.5) * w), w};
  return ProbabilityMeasure(std::move(atoms));
}

ProbabilityMeasure pushforward_at_t(const MAGeodesicToric& geo, double t, int grid_size) {
  check_unit_time(t, "pushforward_at_t");
  if (grid_size < 2) throw DomainError("pushforward_at_t: grid_size must be at least 2");
  constexpr int order = 8;
  const SymplecticPotential u = geo.potential_at(t);
  const auto [s_min, s_max] = truncated_s_interval(u);
  const int panels = (grid_size + order - 1) / order;
  const auto nodes = composite_gauss_legendre(s_min, s_max, panels, order);
  std::vector<Atom> atoms;
  atoms.reserve(nodes.size());
  double total = 0.0;
  for (const auto& n : nodes) {
    const ConjugatePoint c = legendre_transform(u, n.t);
    const double w = c.fpp * n.weight;
    total += w;
    atoms.push_back({geo.g()(c.x.x), w});
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalFailure("pushforward_at_t: quadrature weights underflowed");
  return ProbabilityMeasure(std::move(atoms));
}

double aubin_yau_energy(const MAGeodesicToric& geo) {
  return integrate_adaptive([&](double x) { return geo.g()(x); }, 0.0, 1.0, 1e-10);
}

nlohmann::json to_json(const SymplecticPotential& u) {
  return nlohmann::json{{"poly", u.correction().coeffs()}};
}

SymplecticPotential potential_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("poly") || !j.at("poly").is_array())
    throw ConfigError("potential descriptor must be an object {\"poly\": [c0, c1, ...]}");
  std::vector<double> coeffs;
  for (const auto& c : j.at("poly")) {
    if (!c.is_number()) throw ConfigError("potential coefficients must be numbers");
    coeffs.push_back(c.get<double>());
  }
  return SymplecticPotential(std::move(coeffs));
}

}  // namespace toricq
