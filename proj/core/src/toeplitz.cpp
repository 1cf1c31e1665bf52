#include "toricq/toeplitz.hpp"

#include <algorithm>
#include <cmath>

#include "toricq/errors.hpp"
#include "toricq/io.hpp"

namespace toricq {

Eigen::VectorXd ToeplitzOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (matrix + matrix.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("ToeplitzOperator: eigensolver did not converge");
  return es.eigenvalues();
}

nlohmann::json ToeplitzOperator::to_json() const {
  std::vector<double> rows;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) rows.push_back(matrix(i, j));
  const Eigen::VectorXd ev = eigenvalues();
  return {{"spec", toricq::to_json(spec)},
          {"frame", frame},
          {"symbol", symbol_descriptor},
          {"matrix", rows},
          {"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())}};
}

ToeplitzOperator toeplitz_operator(const GramMatrix& gram, const Weight& weight, const Symbol& xi,
                                   const QuadratureConfig& quad, std::string frame) {
  const SectionSpaceSpec& spec = gram.spec();
  Eigen::MatrixXd m = symbol_form_scaled(spec, weight, xi, gram.log_diag(), quad);
  if (!gram.is_diagonal()) {
    const auto lower = gram.cholesky_lower().triangularView<Eigen::Lower>();
    m = lower.solve(m);
    m = lower.solve(m.transpose()).eval();
  }
  m = 0.5 * (m + m.transpose());
  return {spec, std::move(m), std::move(frame), gram.log_diag(), xi.descriptor, weight, xi, quad};
}

ToeplitzOperator toeplitz_operator(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                                   const QuadratureConfig& quad, std::string frame) {
  return toeplitz_operator(gram_matrix(spec, weight, quad), weight, xi, quad, std::move(frame));
}

ToeplitzOperator derivative_toeplitz(const MAGeodesicToric& geo, double t, const SectionSpaceSpec& spec,
                                     const QuadratureConfig& quad, bool divide_by_k) {
  if (t != 0.0 && t != 1.0) throw DomainError("derivative_toeplitz: t must be 0 or 1");
  const SymplecticPotential& ue = t == 0.0 ? geo.u0() : geo.u1();
  const Polynomial g = geo.g();
  const double k = spec.k();
  const double scale = divide_by_k ? 1.0 / k : 1.0;

  Symbol xi;
  if (spec.flavor() == Flavor::adjoint) {
    xi = Symbol::radial([g, k, scale](const MomentPoint& p) { return scale * k * g(p.x); }, "k*g(x)");
  } else {
    if (!spec.bridge().enabled)
      throw ContractError("derivative_toeplitz: hilb flavor needs bridge parameters (a, c)");
    const BridgeCertificate cert = certify_bridge(geo, spec.bridge().c);
    if (!cert.passed)
      throw ContractError("derivative_toeplitz: bridge certificate fails for c = " + format_double(spec.bridge().c) +
                          " (needs c >= " + format_double(cert.suggested_c) + ")");
    const double a = spec.bridge().a;
    const double c = spec.bridge().c;
    const SymplecticPotential u0 = geo.u0(), u1 = geo.u1();
    const bool at_zero = t == 0.0;
    xi = Symbol::radial(
        [=](const MomentPoint& p) {
          const ConjugatePoint ce = conjugate_at_moment(ue, p);
          const ConjugatePoint co = legendre_transform(at_zero ? u1 : u0, ce.s);
          const ConjugatePoint& c0 = at_zero ? ce : co;
          const ConjugatePoint& c1 = at_zero ? co : ce;
          const double chi_dot = c1.f - c0.f - c * (1.0 - 2.0 * t);
          const double psi_dot = c0.log_fpp - c1.log_fpp;
          return scale * ((k - a) * g(p.x) - a * chi_dot - psi_dot);
        },
        "(k-a)g(x)-a*chi_t-psi_t");
  }
  const Weight w = endpoint_weight(spec, ue);
  return toeplitz_operator(spec, w, xi, quad, t == 0.0 ? "H0" : "H1");
}

namespace {

double symbol_average(const Symbol& xi) {
  if (xi.invariant) return moment_integral(xi);
  const int n = std::max(64, 8 * xi.angular_degree + 8);
  return integrate_adaptive(
      [&](double x) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += xi({x, 1.0 - x}, 2.0 * kPi * l / n);
        return acc / n;
      },
      0.0, 1.0, 1e-12);
}

}  // namespace

double trace_defect(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                    const QuadratureConfig& quad) {
  const ToeplitzOperator t = toeplitz_operator(spec, weight, xi, quad);
  return std::abs(t.matrix.trace() / spec.dimension() - symbol_average(xi));
}

double composition_defect(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                          const Symbol& eta, const QuadratureConfig& quad) {
  const GramMatrix gram = gram_matrix(spec, weight, quad);
  const ToeplitzOperator a = toeplitz_operator(gram, weight, xi, quad);
  const ToeplitzOperator b = toeplitz_operator(gram, weight, eta, quad);
  const ToeplitzOperator ab = toeplitz_operator(gram, weight, xi * eta, quad);
  const Eigen::MatrixXd defect = a.matrix * b.matrix - ab.matrix;
  if (gram.is_diagonal() && xi.invariant && eta.invariant) return defect.diagonal().cwiseAbs().maxCoeff();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(defect);
  return svd.singularValues()(0);
}

double perturbation_shift(const ToeplitzOperator& t, const Symbol& eps) {
  const ToeplitzOperator moved = toeplitz_operator(t.spec, t.weight, t.symbol + eps, t.quad, t.frame);
  return (moved.eigenvalues() - t.eigenvalues()).cwiseAbs().maxCoeff();
}

ProbabilityMeasure toeplitz_spectral_measure(const ToeplitzOperator& t, double divisor) {
  const Eigen::VectorXd ev = t.eigenvalues();
  std::vector<double> loc(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index j = 0; j < ev.size(); ++j) loc[static_cast<std::size_t>(j)] = ev(j) / divisor;
  return ProbabilityMeasure::uniform(loc);
}

}  // namespace toricq
