// Acceptance run: one PASS/FAIL line per criterion.
//
// Families (all start from the Guillemin potential u0 = x log x + (1-x) log(1-x)):
//   translation  u1 = u0 + 0.7
//   linear       u1 = u0 + x
//   nonlinear    u1 = u0 + x^2 / 2
//
// Two checks cannot hold as stated (see KNOWN_FAILURES below and the README);
// they are still evaluated literally and reported as FAIL. The exit status is
// nonzero when any other criterion fails or a known failure starts passing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "toricq/bergman.hpp"
#include "toricq/errors.hpp"
#include "toricq/experiments.hpp"
#include "toricq/finite_geodesics.hpp"
#include "toricq/measures.hpp"
#include "toricq/section_spaces.hpp"
#include "toricq/toeplitz.hpp"
#include "toricq/toric_geometry.hpp"

using namespace toricq;

namespace {

// Tolerances and thresholds.
constexpr double kBeta = 0.7;
constexpr double kExactTol = 1e-10;
constexpr double kLinearSpectrumTol = 1e-8;
constexpr double kLinearW1Slack = 1e-6;
constexpr double kMomentSlope = -0.8;
constexpr double kW1At128 = 0.02;
constexpr double kDistanceTol = 0.02;
constexpr double kZSlope = -0.8;
constexpr double kPinchTol = 1e-8;
constexpr double kOrderTol = 1e-8;
constexpr double kTraceRatio = 4.0;
constexpr double kCompositionSlope = -0.45;
constexpr double kPerturbationTol = 1e-10;
constexpr double kSupDevRatio = 3.0;
constexpr double kFsSupDevTol = 1e-9;
constexpr double kPushforwardTol = 1e-6;
constexpr double kBetaOracleRelTol = 1e-10;
constexpr double kResidualTol = 1e-6;

// Criteria whose literal statement fails for structural reasons:
//  7  for a nonlinear g the endpoint operators bracket A in the opposite
//     order (T1 <= A <= T0); the psd part of the criterion holds.
//  8  for xi = x the 1/k trace term vanishes and the measured defect is at
//     rounding level, so trace_defect * k has no positive lower bound.
const std::set<int> KNOWN_FAILURES{7, 8};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const SymplecticPotential& guillemin() {
  static const SymplecticPotential u = SymplecticPotential::guillemin();
  return u;
}

SymplecticPotential translation_u1() { return SymplecticPotential({kBeta}); }
SymplecticPotential linear_u1() { return SymplecticPotential({0.0, 1.0}); }
SymplecticPotential nonlinear_u1() { return SymplecticPotential({0.0, 0.0, 0.5}); }

struct Solved {
  GramMatrix g0, g1;
  GeodesicSpectrum geo;
};

Solved solve(const SymplecticPotential& u0, const SymplecticPotential& u1, const SectionSpaceSpec& spec) {
  GramMatrix g0 = gram_matrix(spec, endpoint_weight(spec, u0));
  GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, u1));
  GeodesicSpectrum geo = solve_geodesic(g0, g1);
  return {std::move(g0), std::move(g1), std::move(geo)};
}

// Nonlinear family, hilb flavor, memoized by k.
const Solved& nonlinear_hilb(int k) {
  static std::map<int, Solved> cache;
  auto it = cache.find(k);
  if (it == cache.end())
    it = cache.emplace(k, solve(guillemin(), nonlinear_u1(), SectionSpaceSpec(k, Flavor::hilb))).first;
  return it->second;
}

const ProbabilityMeasure& nonlinear_mu() {
  static const ProbabilityMeasure mu = limit_measure(MAGeodesicToric(guillemin(), nonlinear_u1()), 100000);
  return mu;
}

double max_over_min(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) lo = std::min(lo, x), hi = std::max(hi, x);
  return hi / lo;
}

// ---------------------------------------------------------------------------

Outcome c1_translation() {
  const MAGeodesicToric fam(guillemin(), translation_u1());
  const ProbabilityMeasure mu = ProbabilityMeasure::dirac(kBeta);
  double worst = 0.0;
  for (Flavor fl : {Flavor::hilb, Flavor::adjoint})
    for (int k : {4, 8, 16, 32, 64}) {
      const SectionSpaceSpec spec(k, fl);
      const Solved s = solve(fam.u0(), fam.u1(), spec);
      for (Eigen::Index j = 0; j < s.geo.lambdas().size(); ++j)
        worst = std::max(worst, std::abs(s.geo.lambdas()(j) / k - kBeta));
      worst = std::max(worst, wasserstein1(spectral_measure(s.geo), mu));
      worst = std::max(worst, std::abs(geodesic_distance(s.geo) - kBeta));
      worst = std::max(worst, std::abs(z_functional(s.geo) / (static_cast<double>(k) * spec.dimension()) - kBeta));
    }
  return {worst <= kExactTol, fmt("max error over spectra, W1, distance, Z/(k d) = %.3e", worst)};
}

Outcome c2_linear() {
  const MAGeodesicToric fam(guillemin(), linear_u1());
  const ProbabilityMeasure uniform = limit_measure(fam, 200000);
  double spec_err = 0.0, w1_excess = -1.0;
  for (int k : {8, 16, 32, 64, 128}) {
    const Solved s = solve(fam.u0(), fam.u1(), SectionSpaceSpec(k, Flavor::hilb));
    for (int j = 0; j <= k; ++j) spec_err = std::max(spec_err, std::abs(s.geo.lambdas()(j) / k - double(j) / k));
    const double w1 = wasserstein1(spectral_measure(s.geo), uniform);
    w1_excess = std::max(w1_excess, w1 - 1.0 / (2.0 * k));
  }
  return {spec_err <= kLinearSpectrumTol && w1_excess <= kLinearW1Slack,
          fmt("max |lambda_j/k - j/k| = %.3e", spec_err) + fmt(", max W1 - 1/(2k) = %.3e", w1_excess)};
}

Outcome c3_moments() {
  const double limits[] = {1.0 / 6.0, 1.0 / 20.0, 1.0 / 56.0};
  std::vector<std::pair<double, double>> err[3], w1;
  for (int k : {8, 16, 32, 64, 128}) {
    const ProbabilityMeasure nu = spectral_measure(nonlinear_hilb(k).geo);
    for (int p = 1; p <= 3; ++p) err[p - 1].emplace_back(k, std::abs(moment(nu, p) - limits[p - 1]));
    w1.emplace_back(k, wasserstein1(nu, nonlinear_mu()));
  }
  bool ok = true;
  std::string d;
  for (int p = 0; p < 3; ++p) {
    const double slope = fit_rate(err[p]).slope;
    ok = ok && slope <= kMomentSlope;
    d += "slope m" + std::to_string(p + 1) + fmt(" %.3f, ", slope);
  }
  for (std::size_t i = 1; i < w1.size(); ++i) ok = ok && w1[i].second < w1[i - 1].second;
  // Laplace oracle lambda_j ~ k g(j/k) at k = 128.
  std::vector<double> oracle;
  for (int j = 0; j <= 128; ++j) oracle.push_back(0.5 * (j / 128.0) * (j / 128.0));
  const double oracle_w1 = wasserstein1(ProbabilityMeasure::uniform(oracle), nonlinear_mu());
  ok = ok && w1.back().second <= kW1At128;
  d += fmt("W1(128) = %.3e", w1.back().second) + fmt(" (oracle %.3e), W1 decreasing", oracle_w1);
  return {ok, d};
}

Outcome c4_distance() {
  const double err = std::abs(geodesic_distance(nonlinear_hilb(128).geo) - std::sqrt(1.0 / 20.0));
  return {err <= kDistanceTol, fmt("|distance - sqrt(1/20)| at k = 128: %.3e", err)};
}

Outcome c5_z_functional() {
  std::vector<std::pair<double, double>> series;
  for (int k : {8, 16, 32, 64, 128}) {
    const Solved& s = nonlinear_hilb(k);
    series.emplace_back(k, std::abs(z_functional(s.geo) / (k * (k + 1.0)) - 1.0 / 6.0));
  }
  const double slope = fit_rate(series).slope;
  return {slope <= kZSlope, fmt("slope of |Z/(k d) - 1/6| = %.3f", slope)};
}

Outcome c6_pinching() {
  double worst = -1.0;
  for (const SymplecticPotential& u1 : {translation_u1(), linear_u1(), nonlinear_u1()}) {
    const MAGeodesicToric fam(guillemin(), u1);
    for (int k : {4, 8, 16, 32, 64, 128}) {
      const Solved s = solve(fam.u0(), fam.u1(), SectionSpaceSpec(k, Flavor::adjoint));
      worst = std::max({worst, fam.min_g() - s.geo.lambdas().minCoeff() / k,
                        s.geo.lambdas().maxCoeff() / k - fam.max_g()});
    }
  }
  return {worst <= kPinchTol, fmt("largest excursion outside [min g, max g] = %.3e", worst)};
}

Outcome c7_sandwich() {
  const MAGeodesicToric fam(guillemin(), nonlinear_u1());
  double psd = 1e300, m0 = 1e300, m1 = 1e300, order = -1e300;
  double m0r = 1e300, m1r = 1e300, order_r = -1e300;
  for (int k : {8, 16, 32}) {
    const SectionSpaceSpec spec(k, Flavor::adjoint);
    const Solved s = solve(fam.u0(), fam.u1(), spec);
    for (double t : {0.25, 0.5, 0.75})
      psd = std::min(psd, psd_margin(evaluate_Ht(s.geo, s.g0, t), gram_matrix(spec, weight_at_t(fam, t, spec))));
    const SandwichResult r =
        sandwich_check(s.g0, s.g1, s.geo, derivative_toeplitz(fam, 0.0, spec), derivative_toeplitz(fam, 1.0, spec));
    m0 = std::min(m0, r.m0);
    m1 = std::min(m1, r.m1);
    order = std::max(order, r.ordered_violation);
    m0r = std::min(m0r, r.m0_reverse);
    m1r = std::min(m1r, r.m1_reverse);
    order_r = std::max(order_r, r.reverse_violation);
  }
  const bool ok = psd >= -kOrderTol && m0 >= -kOrderTol && m1 >= -kOrderTol && order <= kOrderTol;
  return {ok, fmt("psd margin %.3e", psd) + fmt(", sandwich m0 %.3e", m0) + fmt(" m1 %.3e", m1) +
                  fmt(", order violation %.3e", order) + fmt("; reversed: m0 %.3e", m0r) + fmt(" m1 %.3e", m1r) +
                  fmt(" violation %.3e", order_r)};
}

Outcome c8_trace() {
  const SectionSpaceSpec probe(16, Flavor::hilb);
  const SymplecticPotential uw = nonlinear_u1();
  const double analytic[] = {0.5, 1.0 / 3.0, 2.0 / kPi};
  bool ok = true;
  std::string d;
  const char* names[] = {"x", "x^2", "sin(pi x)"};
  for (int i = 0; i < 3; ++i) {
    const Symbol xi = Symbol::from_json(names[i]);
    ok = ok && std::abs(moment_integral(xi) - analytic[i]) <= 1e-12;
    std::vector<double> scaled;
    for (int k : {16, 32, 64, 128, 256}) {
      const SectionSpaceSpec spec(k, Flavor::hilb);
      scaled.push_back(k * trace_defect(spec, endpoint_weight(spec, uw), xi));
    }
    const double ratio = max_over_min(scaled);
    ok = ok && std::isfinite(ratio) && ratio <= kTraceRatio;
    d += std::string(i ? ", " : "") + names[i] + fmt(": max/min %.3g", ratio) + fmt(" (k=16: %.3e", scaled.front()) +
         fmt(", k=256: %.3e)", scaled.back());
  }
  return {ok, d};
}

Outcome c9_composition() {
  const SymplecticPotential uw = nonlinear_u1();
  const Symbol xi = Symbol::from_json("x"), eta = Symbol::from_json("sin(pi x)");
  std::vector<std::pair<double, double>> series;
  std::vector<double> sq;
  for (int k : {16, 32, 64, 128, 256}) {
    const SectionSpaceSpec spec(k, Flavor::hilb);
    const double c = composition_defect(spec, endpoint_weight(spec, uw), xi, eta);
    series.emplace_back(k, c);
    sq.push_back(c * c * k);
  }
  const double slope = fit_rate(series).slope;
  // Bounded: defect^2 k never exceeds twice its value at the smallest k.
  double peak = 0.0;
  for (double v : sq) peak = std::max(peak, v);
  const bool ok = slope <= kCompositionSlope && peak <= 2.0 * sq.front();
  return {ok, fmt("slope %.3f", slope) + fmt(", defect^2 k in [%.3e, ", *std::min_element(sq.begin(), sq.end())) +
                  fmt("%.3e]", peak)};
}

Outcome c10_perturbation() {
  const SymplecticPotential uw = nonlinear_u1();
  const Symbol xi = Symbol::from_json("x");
  const Symbol wiggle =
      Symbol::radial([](const MomentPoint& p) { return 0.01 * std::sin(2.0 * kPi * p.x); }, "0.01 sin(2 pi x)");
  const Symbol shift = Symbol::constant(0.01);
  double excess = -1.0, const_err = 0.0;
  for (Flavor fl : {Flavor::hilb, Flavor::adjoint})
    for (int k : {16, 64}) {
      const SectionSpaceSpec spec(k, fl);
      const ToeplitzOperator t = toeplitz_operator(spec, endpoint_weight(spec, uw), xi);
      excess = std::max(excess, perturbation_shift(t, wiggle) - sup_norm(wiggle));
      const double c = perturbation_shift(t, shift);
      excess = std::max(excess, c - 0.01);
      const_err = std::max(const_err, std::abs(c - 0.01));
    }
  return {excess <= kPerturbationTol && const_err <= kPerturbationTol,
          fmt("max shift - sup|eps| = %.3e", excess) + fmt(", constant case error %.3e", const_err)};
}

Outcome c11_bergman() {
  const MAGeodesicToric fam(guillemin(), nonlinear_u1());
  bool ok = true;
  std::string d;
  for (double t : {0.0, 0.5, 1.0}) {
    std::vector<double> scaled;
    for (int k : {32, 64, 128, 256}) {
      const Solved& s = nonlinear_hilb(k);
      scaled.push_back(sup_deviation(fam, s.geo, s.g0, t).value * k / std::log(k));
    }
    const double ratio = max_over_min(scaled);
    ok = ok && ratio <= kSupDevRatio;
    d += fmt("t=%.1f ", t) + fmt("max/min %.3f; ", ratio);
  }
  const MAGeodesicToric fs(guillemin(), guillemin());
  double fs_err = 0.0;
  for (int k : {4, 16, 64, 256}) {
    const SectionSpaceSpec spec(k, Flavor::hilb);
    for (double t : {0.0, 0.5, 1.0})
      fs_err = std::max(fs_err, std::abs(sup_deviation(fs, spec, t).value - std::abs(std::log((k + 1.0) / (2.0 * kPi))) / k));
  }
  ok = ok && fs_err <= kFsSupDevTol;
  d += fmt("Fubini-Study error %.3e", fs_err);
  return {ok, d};
}

Outcome c12_pushforward() {
  const MAGeodesicToric fam(guillemin(), nonlinear_u1());
  double spread = 0.0;
  std::vector<ProbabilityMeasure> m;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) m.push_back(pushforward_at_t(fam, t, 4096));
  for (int p = 1; p <= 4; ++p)
    for (const ProbabilityMeasure& a : m) spread = std::max(spread, std::abs(moment(a, p) - moment(m.front(), p)));
  return {spread <= kPushforwardTol, fmt("largest moment variation across t = %.3e", spread)};
}

Outcome c13_beta_oracle() {
  double worst = 0.0;
  for (Flavor fl : {Flavor::hilb, Flavor::adjoint})
    for (int k = 2; k <= 64; ++k) {
      const SectionSpaceSpec spec(k, fl);
      const GramMatrix g = gram_matrix(spec, endpoint_weight(spec, guillemin()));
      for (int j = 0; j < spec.dimension(); ++j) {
        // hilb: 2 pi B(j+1, k-j+1); adjoint: (pi/2) B(j+1, k-j-1).
        const double a = j + 1.0, b = fl == Flavor::hilb ? k - j + 1.0 : k - j - 1.0;
        const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
        const double expected = log_beta + (fl == Flavor::hilb ? std::log(2.0 * kPi) : std::log(kPi / 2.0));
        worst = std::max(worst, std::abs(std::expm1(g.log_diag()(j) - expected)));
      }
    }
  return {worst <= kBetaOracleRelTol, fmt("max relative error %.3e", worst)};
}

Outcome c14_residual() {
  double worst = 0.0;
  for (const SymplecticPotential& u1 : {linear_u1(), nonlinear_u1()}) {
    const MAGeodesicToric fam(guillemin(), u1);
    for (int i = 0; i < 20; ++i) {
      const double t = 0.05 + 0.9 * i / 19.0;
      for (int j = 0; j < 20; ++j) {
        const double s = -10.0 + 20.0 * j / 19.0;
        worst = std::max(worst, std::abs(geodesic_residual(fam, t, s)));
      }
    }
  }
  return {worst <= kResidualTol, fmt("max |f_tt - (f_t')^2 / f''| = %.3e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, c1_translation}, {2, c2_linear},         {3, c3_moments},      {4, c4_distance},
      {5, c5_z_functional}, {6, c6_pinching},      {7, c7_sandwich},     {8, c8_trace},
      {9, c9_composition}, {10, c10_perturbation}, {11, c11_bergman},    {12, c12_pushforward},
      {13, c13_beta_oracle}, {14, c14_residual},
  };
  int unexpected = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = KNOWN_FAILURES.count(id) > 0;
    std::printf("criterion %2d: %s  %s%s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                known && !o.pass ? "  [known failure]" : "");
    std::fflush(stdout);
    if (o.pass == known) ++unexpected;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("elapsed %.1f s; %d unexpected result(s)\n", secs, unexpected);
  return unexpected == 0 ? 0 : 1;
}
