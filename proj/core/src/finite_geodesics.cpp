#include "toricq/finite_geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "toricq/errors.hpp"
#include "toricq/io.hpp"

namespace toricq {

namespace {

constexpr double kCenteredSpreadLimit = 600.0;

void check_compatible(const SectionSpaceSpec& a, const SectionSpaceSpec& b, const char* who) {
  if (a.k() != b.k() || a.flavor() != b.flavor() || a.convention_tag() != b.convention_tag())
    throw ContractError(std::string(who) + ": Gram matrices use different section spaces or conventions");
}

bool same_log_diag(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  const double scale = 1.0 + std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

Eigen::VectorXd ascending_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver did not converge");
  return es.eigenvalues();
}

}  // namespace

GeodesicSpectrum solve_geodesic(const GramMatrix& g0, const GramMatrix& g1) {
  check_compatible(g0.spec(), g1.spec(), "solve_geodesic");
  const int d = g0.dimension();
  GeodesicSpectrum out(g0.spec());
  out.log_diag0_ = g0.log_diag();
  out.log_diag1_ = g1.log_diag();
  const Eigen::VectorXd delta = g1.log_diag() - g0.log_diag();

  if (g0.is_diagonal() && g1.is_diagonal()) {
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return delta(a) < delta(b); });
    out.lambdas_.resize(d);
    out.basis_ = Eigen::MatrixXd::Zero(d, d);
    for (int c = 0; c < d; ++c) {
      out.lambdas_(c) = delta(order[static_cast<std::size_t>(c)]);
      out.basis_(order[static_cast<std::size_t>(c)], c) = 1.0;
    }
    out.q_ = out.basis_;
    out.diagonal_ = true;
    return out;
  }

  const double center = delta.mean();
  const Eigen::VectorXd centered = delta.array() - center;
  if (centered.cwiseAbs().maxCoeff() > kCenteredSpreadLimit)
    throw OverflowError("solve_geodesic: centered log-diagonal spread " +
                        format_double(centered.cwiseAbs().maxCoeff()) + " exceeds the double range");
  const Eigen::VectorXd half = (0.5 * centered).array().exp();
  const Eigen::MatrixXd s1 = half.asDiagonal() * g1.scaled() * half.asDiagonal();
  const Eigen::MatrixXd& l = g0.cholesky_lower();
  const auto lower = l.triangularView<Eigen::Lower>();
  Eigen::MatrixXd c = lower.solve(s1);
  c = lower.solve(c.transpose()).eval();
  c = 0.5 * (c + c.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw NumericalFailure("solve_geodesic: eigensolver did not converge");
  const Eigen::VectorXd mu = es.eigenvalues();
  if (!(mu.minCoeff() > 0.0))
    throw NumericalFailure("solve_geodesic: pencil is not definite (smallest eigenvalue " +
                           format_double(mu.minCoeff()) + ")");
  Eigen::MatrixXd q = es.eigenvectors();
  for (int j = 0; j < d; ++j) {
    Eigen::Index where = 0;
    q.col(j).cwiseAbs().maxCoeff(&where);
    if (q(where, j) < 0.0) q.col(j) *= -1.0;
  }
  out.lambdas_ = mu.array().log() + center;
  out.center_shift_ = center;
  out.q_ = q;
  out.basis_ = l.transpose().triangularView<Eigen::Upper>().solve(q);
  return out;
}

GramMatrix evaluate_Ht(const GeodesicSpectrum& geo, const GramMatrix& g0, double t) {
  check_unit_time(t, "evaluate_Ht");
  check_compatible(geo.spec(), g0.spec(), "evaluate_Ht");
  if (!same_log_diag(geo.log_diag0(), g0.log_diag()))
    throw ContractError("evaluate_Ht: G0 is not the initial point of this geodesic");
  if (t == 0.0) return g0;
  const int d = geo.dimension();
  if (geo.is_diagonal()) {
    Eigen::VectorXd ld = g0.log_diag() + t * (geo.log_diag1() - geo.log_diag0());
    return GramMatrix(g0.spec(), std::move(ld), Eigen::MatrixXd::Identity(d, d), true);
  }
  const double c = geo.center_shift();
  const Eigen::VectorXd scale = (0.5 * t * (geo.lambdas().array() - c)).exp();
  const Eigen::MatrixXd m = g0.cholesky_lower() * geo.frame_vectors() * scale.asDiagonal();
  const Eigen::MatrixXd sw = m * m.transpose();
  const Eigen::VectorXd diag = sw.diagonal();
  Eigen::VectorXd ld = g0.log_diag().array() + t * c + diag.array().log();
  const Eigen::VectorXd inv = diag.array().rsqrt();
  Eigen::MatrixXd scaled = inv.asDiagonal() * sw * inv.asDiagonal();
  scaled.diagonal().setOnes();
  return GramMatrix(g0.spec(), std::move(ld), std::move(scaled), false);
}

ProbabilityMeasure spectral_measure(const GeodesicSpectrum& geo) {
  const double k = geo.spec().k();
  std::vector<double> loc(static_cast<std::size_t>(geo.dimension()));
  for (int j = 0; j < geo.dimension(); ++j) loc[static_cast<std::size_t>(j)] = geo.lambdas()(j) / k;
  return ProbabilityMeasure::uniform(loc);
}

double z_functional(const GeodesicSpectrum& geo) { return geo.lambdas().sum(); }

double geodesic_distance(const GeodesicSpectrum& geo) {
  const double k = geo.spec().k();
  return std::sqrt((geo.lambdas() / k).squaredNorm() / geo.dimension());
}

double psd_margin(const GramMatrix& ga, const GramMatrix& gb) {
  return std::expm1(solve_geodesic(ga, gb).lambdas()(0));
}

Eigen::MatrixXd tangent_operator(const GeodesicSpectrum& geo, const GramMatrix& frame_gram, bool at_one) {
  check_compatible(geo.spec(), frame_gram.spec(), "tangent_operator");
  const Eigen::VectorXd& lam = geo.lambdas();
  Eigen::MatrixXd a;
  if (!at_one) {
    if (!same_log_diag(geo.log_diag0(), frame_gram.log_diag()))
      throw ContractError("tangent_operator: frame Gram is not G0");
    a = geo.frame_vectors() * lam.asDiagonal() * geo.frame_vectors().transpose();
  } else {
    if (!same_log_diag(geo.log_diag1(), frame_gram.log_diag()))
      throw ContractError("tangent_operator: frame Gram is not G1");
    const double c = geo.center_shift();
    const Eigen::VectorXd half = (0.5 * ((geo.log_diag1() - geo.log_diag0()).array() - c)).exp();
    const Eigen::VectorXd unscale = (-0.5 * (lam.array() - c)).exp();
    const Eigen::MatrixXd r =
        frame_gram.cholesky_lower().transpose() * half.asDiagonal() * geo.basis() * unscale.asDiagonal();
    a = r * lam.asDiagonal() * r.transpose();
  }
  return 0.5 * (a + a.transpose());
}

SandwichResult sandwich_check(const GramMatrix& g0, const GramMatrix& g1, const GeodesicSpectrum& geo,
                              const ToeplitzOperator& t0, const ToeplitzOperator& t1) {
  if (t0.frame != "H0" || !same_log_diag(t0.frame_log_diag, g0.log_diag()))
    throw ContractError("sandwich_check: T0 must be written in the G0-orthonormal frame");
  if (t1.frame != "H1" || !same_log_diag(t1.frame_log_diag, g1.log_diag()))
    throw ContractError("sandwich_check: T1 must be written in the G1-orthonormal frame");
  check_compatible(t0.spec, geo.spec(), "sandwich_check");
  check_compatible(t1.spec, geo.spec(), "sandwich_check");

  const Eigen::MatrixXd a0 = tangent_operator(geo, g0, false);
  const Eigen::MatrixXd a1 = tangent_operator(geo, g1, true);
  SandwichResult r;
  r.m0 = ascending_eigenvalues(a0 - t0.matrix)(0);
  r.m1 = ascending_eigenvalues(t1.matrix - a1)(0);
  r.tau0 = t0.eigenvalues();
  r.tau1 = t1.eigenvalues();
  r.lambda = geo.lambdas();
  r.m0_reverse = ascending_eigenvalues(t0.matrix - a0)(0);
  r.m1_reverse = ascending_eigenvalues(a1 - t1.matrix)(0);
  r.ordered_violation = -std::numeric_limits<double>::infinity();
  r.reverse_violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < r.lambda.size(); ++j) {
    r.ordered_violation = std::max({r.ordered_violation, r.tau0(j) - r.lambda(j), r.lambda(j) - r.tau1(j)});
    r.reverse_violation = std::max({r.reverse_violation, r.lambda(j) - r.tau0(j), r.tau1(j) - r.lambda(j)});
  }
  return r;
}

nlohmann::json GeodesicSpectrum::to_json() const {
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  std::vector<double> basis;
  for (Eigen::Index i = 0; i < basis_.rows(); ++i)
    for (Eigen::Index j = 0; j < basis_.cols(); ++j) basis.push_back(basis_(i, j));
  return {{"spec", toricq::to_json(spec_)},
          {"convention_tag", spec_.convention_tag()},
          {"lambdas", vec(lambdas_)},
          {"center_shift", center_shift_},
          {"basis", basis}};
}

std::string GeodesicSpectrum::to_csv() const {
  std::ostringstream out;
  out << "k,j,lambda_over_k\n";
  for (Eigen::Index j = 0; j < lambdas_.size(); ++j)
    out << spec_.k() << ',' << j << ',' << format_double(lambdas_(j) / spec_.k()) << '\n';
  return out.str();
}

}  // namespace toricq
