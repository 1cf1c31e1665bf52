#include "toricq/bergman.hpp"

#include <algorithm>
#include <cmath>

#include "toricq/errors.hpp"

namespace toricq {

double reference_tau(Flavor flavor, double s) noexcept {
  return flavor == Flavor::hilb ? 0.0 : s - 2.0 * softplus(s);
}

std::string reference_tau_descriptor(Flavor flavor) {
  return flavor == Flavor::hilb ? "tau=0" : "tau(s)=s-2log(1+e^s)";
}

namespace {

double flavor_offset(Flavor flavor, double s) noexcept { return flavor == Flavor::adjoint ? s : 0.0; }

// log |sum_i w_i e^{a_i} e^{i i theta}|^2
double log_abs2(const Eigen::Ref<const Eigen::VectorXd>& w, const std::vector<double>& a, double theta) {
  double shift = kNegInf;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (w(static_cast<Eigen::Index>(i)) != 0.0) shift = std::max(shift, a[i]);
  if (shift == kNegInf) return kNegInf;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double wi = w(static_cast<Eigen::Index>(i));
    if (wi == 0.0) continue;
    const double m = wi * std::exp(a[i] - shift);
    re += m * std::cos(static_cast<double>(i) * theta);
    im += m * std::sin(static_cast<double>(i) * theta);
  }
  return 2.0 * shift + std::log(re * re + im * im);
}

BergmanEvaluation make_evaluation(const SectionSpaceSpec& spec, double t, const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw ContractError("Bergman evaluation needs a nonempty grid");
  BergmanEvaluation e;
  e.t = t;
  e.k = spec.k();
  e.flavor = spec.flavor();
  e.s_grid = s_grid;
  e.log_B.reserve(s_grid.size());
  e.reference_tau = reference_tau_descriptor(spec.flavor());
  return e;
}

}  // namespace

BergmanEvaluation bergman_kernel_log(const GeodesicSpectrum& geo, const GramMatrix& g0, double t,
                                     const std::vector<double>& s_grid, double theta) {
  check_unit_time(t, "bergman_kernel_log");
  if (g0.log_diag().size() != geo.dimension() || g0.spec().k() != geo.spec().k())
    throw ContractError("bergman_kernel_log: G0 does not belong to this geodesic");
  BergmanEvaluation e = make_evaluation(geo.spec(), t, s_grid);
  const int d = geo.dimension();
  const Eigen::VectorXd& ld0 = geo.log_diag0();
  const Eigen::VectorXd& lam = geo.lambdas();
  std::vector<double> terms(static_cast<std::size_t>(d));
  std::vector<double> a(static_cast<std::size_t>(d));

  if (geo.is_diagonal() && theta == 0.0) {
    const Eigen::VectorXd delta = geo.log_diag1() - ld0;
    for (double s : s_grid) {
      for (int i = 0; i < d; ++i) terms[static_cast<std::size_t>(i)] = -t * delta(i) + i * s - ld0(i);
      e.log_B.push_back(log_sum_exp(terms) + flavor_offset(geo.spec().flavor(), s));
    }
    return e;
  }
  for (double s : s_grid) {
    for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i)] = 0.5 * (i * s - ld0(i));
    for (int j = 0; j < d; ++j)
      terms[static_cast<std::size_t>(j)] = -t * lam(j) + log_abs2(geo.basis().col(j), a, theta);
    e.log_B.push_back(log_sum_exp(terms) + flavor_offset(geo.spec().flavor(), s));
  }
  return e;
}

BergmanEvaluation bergman_kernel_direct(const GramMatrix& g, const std::vector<double>& s_grid, double theta) {
  BergmanEvaluation e = make_evaluation(g.spec(), 0.0, s_grid);
  const int d = g.dimension();
  const auto lower = g.cholesky_lower().triangularView<Eigen::Lower>();
  Eigen::VectorXd re(d), im(d);
  for (double s : s_grid) {
    double shift = kNegInf;
    for (int i = 0; i < d; ++i) shift = std::max(shift, 0.5 * (i * s - g.log_diag()(i)));
    for (int i = 0; i < d; ++i) {
      const double m = std::exp(0.5 * (i * s - g.log_diag()(i)) - shift);
      re(i) = m * std::cos(i * theta);
      im(i) = m * std::sin(i * theta);
    }
    const double b = lower.solve(re).squaredNorm() + lower.solve(im).squaredNorm();
    e.log_B.push_back(2.0 * shift + std::log(b) + flavor_offset(g.spec().flavor(), s));
  }
  return e;
}

std::vector<double> fs_metric(const BergmanEvaluation& eval) {
  std::vector<double> out(eval.s_grid.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (eval.log_B[i] - reference_tau(eval.flavor, eval.s_grid[i])) / eval.k;
  return out;
}

namespace {

constexpr int kInitialGrid = 513;
constexpr int kMaxGrid = 1 << 16;

std::vector<double> uniform_grid(double half_width, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = -half_width + 2.0 * half_width * i / (n - 1);
  return g;
}

double grid_sup(const GeodesicSpectrum& spectrum, const GramMatrix& g0, const SymplecticPotential& ut, double t,
                const std::vector<double>& grid) {
  const std::vector<double> fs = fs_metric(bergman_kernel_log(spectrum, g0, t, grid));
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    best = std::max(best, std::abs(fs[i] - legendre_transform(ut, grid[i]).f));
  return best;
}

// k^{-1} log sum_j e^{-t lambda_j} W_ij^2 - k^{-1} log_diag0_i
double tail_constant(const GeodesicSpectrum& spectrum, double t, int row) {
  std::vector<double> terms;
  for (int j = 0; j < spectrum.dimension(); ++j) {
    const double w = spectrum.basis()(row, j);
    if (w != 0.0) terms.push_back(-t * spectrum.lambdas()(j) + 2.0 * std::log(std::abs(w)));
  }
  return (log_sum_exp(terms) - spectrum.log_diag0()(row)) / spectrum.spec().k();
}

}  // namespace

SupDeviation sup_deviation(const MAGeodesicToric& geo, const GeodesicSpectrum& spectrum, const GramMatrix& g0,
                           double t) {
  check_unit_time(t, "sup_deviation");
  const SymplecticPotential ut = geo.potential_at(t);
  SupDeviation out;
  out.tail_minus = std::abs(tail_constant(spectrum, t, 0) + ut.correction()(0.0));
  out.tail_plus = std::abs(tail_constant(spectrum, t, spectrum.dimension() - 1) + ut.correction()(1.0));
  out.half_width = 30.0 + std::max(geo.u0().slope_bound(), geo.u1().slope_bound());

  int n = kInitialGrid;
  double sup = grid_sup(spectrum, g0, ut, t, uniform_grid(out.half_width, n));
  for (;;) {
    const int next = 2 * n - 1;
    if (next > kMaxGrid)
      throw NumericalFailure("sup_deviation: grid sup did not stabilize within 2^16 points");
    const double refined = grid_sup(spectrum, g0, ut, t, uniform_grid(out.half_width, next));
    n = next;
    const bool stable = std::abs(refined - sup) <= 0.01 * refined;
    sup = refined;
    if (stable) break;
  }
  out.grid_sup = sup;
  out.grid_points = n;
  out.value = std::max({sup, out.tail_minus, out.tail_plus});
  return out;
}

SupDeviation sup_deviation(const MAGeodesicToric& geo, const SectionSpaceSpec& spec, double t,
                           const QuadratureConfig& quad) {
  const GramMatrix g0 = gram_matrix(spec, endpoint_weight(spec, geo.u0()), quad);
  const GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, geo.u1()), quad);
  return sup_deviation(geo, solve_geodesic(g0, g1), g0, t);
}

}  // namespace toricq
