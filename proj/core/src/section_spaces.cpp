#include "toricq/section_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "toricq/errors.hpp"
#include "toricq/io.hpp"

namespace toricq {

std::string to_string(Flavor f) { return f == Flavor::hilb ? "hilb" : "adjoint"; }

Flavor flavor_from_string(const std::string& name) {
  if (name == "hilb") return Flavor::hilb;
  if (name == "adjoint") return Flavor::adjoint;
  throw ConfigError("unknown flavor '" + name + "' (expected \"hilb\" or \"adjoint\")");
}

SectionSpaceSpec::SectionSpaceSpec(int k, Flavor flavor, BridgeParams bridge)
    : k_(k), flavor_(flavor), bridge_(bridge) {
  if (flavor == Flavor::hilb && k < 1) throw PreconditionError("hilb flavor needs k >= 1");
  if (flavor == Flavor::adjoint && k < 2) throw PreconditionError("adjoint flavor needs k >= 2");
  if (bridge.enabled && !(bridge.a >= 0.0 && bridge.c >= 0.0 && bridge.a <= k))
    throw PreconditionError("bridge parameters need 0 <= a <= k and c >= 0");
}

double SectionSpaceSpec::log_constant() const noexcept {
  return flavor_ == Flavor::hilb ? std::log(2.0 * kPi) : std::log(0.5 * kPi);
}

std::string SectionSpaceSpec::convention_tag() const {
  return flavor_ == Flavor::hilb ? "hilb:2pi*int(e^{(i+j)s/2-kf}f'')"
                                 : "adjoint:pi/2*int(e^{((i+j)/2+1)s-kf})";
}

nlohmann::json to_json(const SectionSpaceSpec& spec) {
  nlohmann::json j{{"k", spec.k()}, {"flavor", to_string(spec.flavor())}, {"dimension", spec.dimension()}};
  if (spec.bridge().enabled) j["bridge"] = {{"a", spec.bridge().a}, {"c", spec.bridge().c}};
  return j;
}

int QuadratureConfig::radial_for(const SectionSpaceSpec& spec) const {
  return radial_nodes > 0 ? radial_nodes : 4 * spec.k() + 64;
}

int QuadratureConfig::angular_for(const SectionSpaceSpec& spec, int max_frequency) const {
  return angular_nodes > 0 ? angular_nodes : 2 * spec.dimension() + 32 * max_frequency + 32;
}

void QuadratureConfig::validate() const {
  if (radial_nodes != 0 && radial_nodes < 64)
    throw PreconditionError("quadrature needs at least 64 radial nodes");
  if (angular_nodes != 0 && angular_nodes < 32)
    throw PreconditionError("quadrature needs at least 32 angular nodes");
}

double Weight::log_density(double s) const {
  double l = s_coeff * s + constant;
  for (const PotentialTerm& term : terms) {
    const ConjugatePoint c = legendre_transform(term.u, s);
    l += -term.f_coeff * c.f + term.log_hessian_coeff * c.log_fpp;
  }
  return l;
}

Weight endpoint_weight(const SectionSpaceSpec& spec, const SymplecticPotential& u) {
  Weight w;
  w.reference = u;
  const double k = spec.k();
  if (spec.flavor() == Flavor::hilb) {
    w.terms.push_back({k, 1.0, u});
  } else {
    w.terms.push_back({k, 0.0, u});
    w.s_coeff = 1.0;
  }
  return w;
}

Weight weight_at_t(const MAGeodesicToric& geo, double t, const SectionSpaceSpec& spec) {
  check_unit_time(t, "weight_at_t");
  if (t == 0.0) return endpoint_weight(spec, geo.u0());
  if (t == 1.0) return endpoint_weight(spec, geo.u1());
  const SymplecticPotential ut = geo.potential_at(t);
  if (spec.flavor() == Flavor::adjoint || !spec.bridge().enabled) return endpoint_weight(spec, ut);

  const double k = spec.k();
  const double a = spec.bridge().a;
  const double c = spec.bridge().c;
  Weight w;
  w.reference = ut;
  w.terms.push_back({k - a, 0.0, ut});
  w.terms.push_back({a * t, t, geo.u1()});
  w.terms.push_back({a * (1.0 - t), 1.0 - t, geo.u0()});
  // -a chi_t contributes +a c t (1 - t).
  w.constant = a * c * t * (1.0 - t);
  return w;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct Samples {
  std::vector<MomentPoint> x;
  std::vector<double> s;
  std::vector<double> base;  // log(node weight * ds/dx * C) + L(s)
};

Samples sample_weight(const SectionSpaceSpec& spec, const Weight& weight, int nodes) {
  const auto& rule = gauss_legendre_unit(nodes);
  std::vector<bool> is_reference;
  for (const PotentialTerm& term : weight.terms) is_reference.push_back(term.u == weight.reference);

  Samples out;
  out.x.reserve(rule.size());
  out.s.reserve(rule.size());
  out.base.reserve(rule.size());
  const double log_c = spec.log_constant();
  for (const UnitNode& node : rule) {
    const ConjugatePoint ref = conjugate_at_moment(weight.reference, node.point);
    double l = weight.s_coeff * ref.s + weight.constant;
    for (std::size_t i = 0; i < weight.terms.size(); ++i) {
      const PotentialTerm& term = weight.terms[i];
      const ConjugatePoint c = is_reference[i] ? ref : legendre_transform(term.u, ref.s);
      l += -term.f_coeff * c.f + term.log_hessian_coeff * c.log_fpp;
    }
    // ds = u''(x) dx and log u'' = -log f''.
    const double b = std::log(node.weight) - ref.log_fpp + log_c + l;
    if (std::isnan(b)) throw NumericalFailure("gram assembly: log-density is NaN at s = " + std::to_string(ref.s));
    out.x.push_back(node.point);
    out.s.push_back(ref.s);
    out.base.push_back(b);
  }
  return out;
}

// coeff(n, m) = mean over angular nodes of cos(n theta) * weight factor * symbol,
// for n = 0..d-1 at every radial node m.
Eigen::MatrixXd angular_coefficients(const Samples& smp, const Weight& weight, const Symbol* xi, int d,
                                     int n_theta) {
  std::vector<double> cos_table(static_cast<std::size_t>(n_theta));
  for (int l = 0; l < n_theta; ++l) cos_table[static_cast<std::size_t>(l)] = std::cos(2.0 * kPi * l / n_theta);
  const auto nodes = static_cast<Eigen::Index>(smp.x.size());
  Eigen::MatrixXd coeff(d, nodes);
  std::vector<double> values(static_cast<std::size_t>(n_theta));
  for (Eigen::Index m = 0; m < nodes; ++m) {
    const MomentPoint& p = smp.x[static_cast<std::size_t>(m)];
    const double amp = weight.angular ? weight.angular->epsilon * weight.angular->profile(p.x) : 0.0;
    const int freq = weight.angular ? weight.angular->m : 0;
    for (int l = 0; l < n_theta; ++l) {
      const double theta = 2.0 * kPi * l / n_theta;
      double v = std::exp(-amp * cos_table[static_cast<std::size_t>((static_cast<long>(freq) * l) % n_theta)]);
      if (xi) v *= (*xi)(p, theta);
      values[static_cast<std::size_t>(l)] = v;
    }
    for (int n = 0; n < d; ++n) {
      double acc = 0.0;
      for (int l = 0; l < n_theta; ++l)
        acc += cos_table[static_cast<std::size_t>((static_cast<long>(n) * l) % n_theta)] *
               values[static_cast<std::size_t>(l)];
      coeff(n, m) = acc / n_theta;
    }
  }
  return coeff;
}

// e(m, i) = exp((base_m + i s_m - ld_i) / 2).
Eigen::MatrixXd half_factors(const Samples& smp, const Eigen::VectorXd& ld) {
  const auto nodes = static_cast<Eigen::Index>(smp.s.size());
  Eigen::MatrixXd e(nodes, ld.size());
  for (Eigen::Index m = 0; m < nodes; ++m)
    for (Eigen::Index i = 0; i < ld.size(); ++i)
      e(m, i) = std::exp(0.5 * (smp.base[static_cast<std::size_t>(m)] +
                                static_cast<double>(i) * smp.s[static_cast<std::size_t>(m)] - ld(i)));
  return e;
}

Eigen::MatrixXd banded_form(const Eigen::MatrixXd& e, const Eigen::MatrixXd& coeff) {
  const Eigen::Index d = e.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index m = 0; m < e.rows(); ++m)
    for (Eigen::Index i = 0; i < d; ++i) {
      const double ei = e(m, i);
      if (ei == 0.0) continue;
      for (Eigen::Index j = i; j < d; ++j) out(i, j) += coeff(j - i, m) * ei * e(m, j);
    }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
  return out;
}

int max_frequency(const Weight& weight, const Symbol* xi) {
  int f = weight.angular ? weight.angular->m : 0;
  if (xi) f = std::max(f, xi->angular_degree);
  return f;
}

}  // namespace

GramMatrix gram_matrix(const SectionSpaceSpec& spec, const Weight& weight, const QuadratureConfig& quad) {
  quad.validate();
  const int d = spec.dimension();
  const Samples smp = sample_weight(spec, weight, quad.radial_for(spec));
  const auto nodes = smp.s.size();

  Eigen::MatrixXd coeff;
  const bool diagonal = weight.invariant();
  if (!diagonal) coeff = angular_coefficients(smp, weight, nullptr, d, quad.angular_for(spec, max_frequency(weight, nullptr)));

  Eigen::VectorXd ld(d);
  std::vector<double> terms(nodes);
  for (int i = 0; i < d; ++i) {
    for (std::size_t m = 0; m < nodes; ++m) {
      terms[m] = smp.base[m] + i * smp.s[m];
      if (!diagonal) {
        const double a0 = coeff(0, static_cast<Eigen::Index>(m));
        terms[m] = a0 > 0.0 ? terms[m] + std::log(a0) : kNegInf;
      }
    }
    ld(i) = log_sum_exp(terms);
    if (!std::isfinite(ld(i)))
      throw NumericalFailure("gram assembly: diagonal entry " + std::to_string(i) + " is not representable");
  }
  if (diagonal) return GramMatrix(spec, std::move(ld), Eigen::MatrixXd::Identity(d, d), true);

  Eigen::MatrixXd scaled = banded_form(half_factors(smp, ld), coeff);
  scaled.diagonal().setOnes();
  return GramMatrix(spec, std::move(ld), std::move(scaled), false);
}

Eigen::MatrixXd symbol_form_scaled(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                                   const Eigen::VectorXd& frame_log_diag, const QuadratureConfig& quad) {
  quad.validate();
  const int d = spec.dimension();
  if (frame_log_diag.size() != d) throw ContractError("symbol_form_scaled: frame has the wrong dimension");
  const Samples smp = sample_weight(spec, weight, quad.radial_for(spec));
  const Eigen::MatrixXd e = half_factors(smp, frame_log_diag);
  if (weight.invariant() && xi.invariant) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t m = 0; m < smp.s.size(); ++m) {
      const double v = xi(smp.x[m]);
      for (int i = 0; i < d; ++i) out(i, i) += v * e(static_cast<Eigen::Index>(m), i) * e(static_cast<Eigen::Index>(m), i);
    }
    return out;
  }
  const Eigen::MatrixXd coeff =
      angular_coefficients(smp, weight, &xi, d, quad.angular_for(spec, max_frequency(weight, &xi)));
  return banded_form(e, coeff);
}

// ---------------------------------------------------------------------------
// GramMatrix

GramMatrix::GramMatrix(SectionSpaceSpec spec, Eigen::VectorXd log_diag, Eigen::MatrixXd scaled, bool diagonal)
    : spec_(std::move(spec)), log_diag_(std::move(log_diag)), scaled_(std::move(scaled)), diagonal_(diagonal) {
  const int d = spec_.dimension();
  if (log_diag_.size() != d || scaled_.rows() != d || scaled_.cols() != d)
    throw ContractError("GramMatrix: size does not match the section space dimension");
  if (!log_diag_.allFinite() || !scaled_.allFinite()) throw NumericalFailure("GramMatrix: non-finite entries");
  const double asym = (scaled_ - scaled_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw NumericalFailure("GramMatrix: scaled matrix is not symmetric");
  scaled_ = 0.5 * (scaled_ + scaled_.transpose());
  if (diagonal_) {
    lower_ = Eigen::MatrixXd::Identity(d, d);
    return;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(scaled_);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled_);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    Eigen::Index where = 0;
    const double smallest = pivots.minCoeff(&where);
    throw NumericalFailure("GramMatrix: not positive definite, smallest pivot " + format_double(smallest) +
                           " at index " + std::to_string(where));
  }
  lower_ = llt.matrixL();
}

GramMatrix GramMatrix::from_raw(const SectionSpaceSpec& spec, const Eigen::MatrixXd& raw) {
  const Eigen::Index d = raw.rows();
  if (raw.cols() != d) throw ContractError("GramMatrix::from_raw: matrix must be square");
  Eigen::VectorXd ld(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(raw(i, i) > 0.0)) throw NumericalFailure("GramMatrix::from_raw: nonpositive diagonal");
    ld(i) = std::log(raw(i, i));
  }
  Eigen::MatrixXd scaled(d, d);
  bool diagonal = true;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      scaled(i, j) = i == j ? 1.0 : raw(i, j) * std::exp(-0.5 * (ld(i) + ld(j)));
      if (i != j && raw(i, j) != 0.0) diagonal = false;
    }
  return GramMatrix(spec, std::move(ld), std::move(scaled), diagonal);
}

double GramMatrix::log_det() const noexcept {
  double acc = log_diag_.sum();
  for (Eigen::Index i = 0; i < lower_.rows(); ++i) acc += 2.0 * std::log(lower_(i, i));
  return acc;
}

Eigen::MatrixXd GramMatrix::raw() const {
  const double hi = log_diag_.maxCoeff();
  const double lo = log_diag_.minCoeff();
  if (hi - lo > 500.0 || hi > 700.0 || lo < -700.0)
    throw OverflowError("GramMatrix::raw: log-diagonal spread " + format_double(hi - lo) +
                        " is too large; work in scaled coordinates or center the log-diagonal first");
  const Eigen::VectorXd half = (0.5 * log_diag_).array().exp();
  return half.asDiagonal() * scaled_ * half.asDiagonal();
}

GramMatrix GramMatrix::congruence(const Eigen::VectorXd& log_scale) const {
  if (log_scale.size() != log_diag_.size()) throw ContractError("congruence: wrong dimension");
  GramMatrix out = *this;
  out.log_diag_ += 2.0 * log_scale;
  return out;
}

nlohmann::json GramMatrix::to_json() const {
  std::vector<double> ld(log_diag_.data(), log_diag_.data() + log_diag_.size());
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(scaled_.size()));
  for (Eigen::Index i = 0; i < scaled_.rows(); ++i)
    for (Eigen::Index j = 0; j < scaled_.cols(); ++j) rows.push_back(scaled_(i, j));
  return {{"spec", toricq::to_json(spec_)},
          {"convention_tag", convention_tag()},
          {"log_diag", ld},
          {"scaled", rows}};
}

std::string GramMatrix::log_diag_csv() const {
  std::ostringstream out;
  out << "j,log_diag\n";
  for (Eigen::Index j = 0; j < log_diag_.size(); ++j) out << j << ',' << format_double(log_diag_(j)) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Bridge

namespace {

constexpr int kCertificateGrid = 40;

struct GridPoint {
  double t;
  ConjugatePoint c0, c1;
};

std::vector<GridPoint> certificate_grid(const MAGeodesicToric& geo) {
  const SymplecticPotential mid = geo.potential_at(0.5);
  std::vector<GridPoint> pts;
  pts.reserve(kCertificateGrid * kCertificateGrid);
  for (int j = 0; j < kCertificateGrid; ++j) {
    const double x = (j + 0.5) / kCertificateGrid;
    const double s = mid.first_derivative({x, 1.0 - x});
    const ConjugatePoint c0 = legendre_transform(geo.u0(), s);
    const ConjugatePoint c1 = legendre_transform(geo.u1(), s);
    for (int i = 0; i < kCertificateGrid; ++i)
      pts.push_back({static_cast<double>(i) / (kCertificateGrid - 1), c0, c1});
  }
  return pts;
}

// d/ds log f''(s) and d^2/ds^2 log f''(s) in terms of derivatives of u at x = f'(s).
std::pair<double, double> log_fpp_derivatives(const SymplecticPotential& u, const MomentPoint& p) {
  const double u2 = u.second_derivative(p);
  const double u3 = u.third_derivative(p);
  const double u4 = u.fourth_derivative(p);
  const double d1 = -u3 / (u2 * u2);
  const double d2 = (-u4 / (u2 * u2) + 2.0 * u3 * u3 / (u2 * u2 * u2)) / u2;
  return {d1, d2};
}

}  // namespace

BridgeCertificate certify_bridge(const MAGeodesicToric& geo, double c) {
  if (!(c >= 0.0)) throw PreconditionError("certify_bridge: c must be nonnegative");
  BridgeCertificate cert;
  cert.c = c;
  cert.min_margin = std::numeric_limits<double>::infinity();
  for (const GridPoint& g : certificate_grid(geo)) {
    const double chi_ss = g.t * g.c1.fpp + (1.0 - g.t) * g.c0.fpp;
    const double dx = g.c1.x.x - g.c0.x.x;
    cert.min_margin = std::min(cert.min_margin, 2.0 * c * chi_ss - dx * dx);
    cert.suggested_c = std::max(cert.suggested_c, dx * dx / (2.0 * chi_ss));
  }
  cert.passed = cert.min_margin >= 0.0;
  return cert;
}

CurvatureCertificate certify_bridge_curvature(const MAGeodesicToric& geo, double a, double c) {
  if (!(a >= 0.0 && c >= 0.0)) throw PreconditionError("certify_bridge_curvature: a, c must be nonnegative");
  struct Entry {
    double chi_ss, dx, psi_ts, psi_ss;
  };
  std::vector<Entry> entries;
  for (const GridPoint& g : certificate_grid(geo)) {
    const auto [d1_0, d2_0] = log_fpp_derivatives(geo.u0(), g.c0.x);
    const auto [d1_1, d2_1] = log_fpp_derivatives(geo.u1(), g.c1.x);
    entries.push_back({g.t * g.c1.fpp + (1.0 - g.t) * g.c0.fpp, g.c1.x.x - g.c0.x.x, d1_0 - d1_1,
                       -(1.0 - g.t) * d2_0 - g.t * d2_1});
  }
  const auto min_eig = [&](double aa) {
    double best = std::numeric_limits<double>::infinity();
    for (const Entry& e : entries) {
      const double p = 2.0 * aa * c;
      const double q = aa * e.chi_ss + e.psi_ss;
      const double r = aa * e.dx + e.psi_ts;
      best = std::min(best, 0.5 * (p + q) - std::hypot(0.5 * (p - q), r));
    }
    return best;
  };

  CurvatureCertificate cert;
  cert.a = a;
  cert.c = c;
  cert.min_eigenvalue = min_eig(a);
  cert.passed = cert.min_eigenvalue >= 0.0;

  double hi = 1.0;
  while (hi <= 1048576.0 && min_eig(hi) < 0.0) hi *= 2.0;
  if (hi > 1048576.0) {
    cert.suggested_a = std::numeric_limits<double>::infinity();
  } else if (min_eig(0.0) >= 0.0) {
    cert.suggested_a = 0.0;
  } else {
    double lo = hi == 1.0 ? 0.0 : 0.5 * hi;
    for (int it = 0; it < 60; ++it) {
      const double midpoint = 0.5 * (lo + hi);
      (min_eig(midpoint) >= 0.0 ? hi : lo) = midpoint;
    }
    cert.suggested_a = hi;
  }
  return cert;
}

BridgeWeight::BridgeWeight(const MAGeodesicToric& geo, double t, double c, BridgeCertificate certificate)
    : u0_(geo.u0()), u1_(geo.u1()), t_(t), c_(c), certificate_(certificate) {}

double BridgeWeight::value(double s) const {
  return t_ * legendre_transform(u1_, s).f + (1.0 - t_) * legendre_transform(u0_, s).f - c_ * t_ * (1.0 - t_);
}

double BridgeWeight::derivative(double s) const {
  return t_ * legendre_transform(u1_, s).x.x + (1.0 - t_) * legendre_transform(u0_, s).x.x;
}

double BridgeWeight::second_derivative(double s) const {
  return t_ * legendre_transform(u1_, s).fpp + (1.0 - t_) * legendre_transform(u0_, s).fpp;
}

double BridgeWeight::time_derivative(double s) const {
  return legendre_transform(u1_, s).f - legendre_transform(u0_, s).f - c_ * (1.0 - 2.0 * t_);
}

BridgeWeight bridge_weight(const MAGeodesicToric& geo, double t, double c) {
  check_unit_time(t, "bridge_weight");
  BridgeCertificate cert = certify_bridge(geo, c);
  if (!cert.passed)
    throw PositivityError("bridge_weight: certificate fails for c = " + format_double(c) +
                              "; smallest passing c is " + format_double(cert.suggested_c),
                          cert.suggested_c);
  return BridgeWeight(geo, t, c, cert);
}

}  // namespace toricq
