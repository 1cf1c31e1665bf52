#pragma once

// Quantized section spaces of O(k) -> CP^1 and their Gram matrices.
//
// Monomial sections z^j are orthogonal for S^1-invariant weights, so the Gram
// matrix of an invariant weight is diagonal and only its log-diagonal is
// stored. Angular perturbations couple monomials through cos((i - j) theta).
// All matrices are real symmetric: every weight and symbol used here is even
// in theta, which makes the Hermitian Gram matrices real.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "toricq/polynomial.hpp"
#include "toricq/symbol.hpp"
#include "toricq/toric_geometry.hpp"

namespace toricq {

enum class Flavor { hilb, adjoint };

std::string to_string(Flavor f);
/// "hilb" or "adjoint"; ConfigError otherwise.
Flavor flavor_from_string(const std::string& name);

struct BridgeParams {
  bool enabled = false;
  double a = 0.0;
  double c = 0.0;

  bool operator==(const BridgeParams&) const = default;
};

class SectionSpaceSpec {
 public:
  /// hilb needs k >= 1, adjoint k >= 2; bridge parameters must be nonnegative
  /// with a <= k. PreconditionError otherwise.
  SectionSpaceSpec(int k, Flavor flavor, BridgeParams bridge = {});

  int k() const noexcept { return k_; }
  Flavor flavor() const noexcept { return flavor_; }
  const BridgeParams& bridge() const noexcept { return bridge_; }
  /// hilb: k + 1 sections z^j; adjoint: k - 1 sections z^j dz.
  int dimension() const noexcept { return flavor_ == Flavor::hilb ? k_ + 1 : k_ - 1; }

  /// log of the angular/volume constant in front of the reduced integral.
  double log_constant() const noexcept;
  std::string convention_tag() const;

  bool operator==(const SectionSpaceSpec&) const = default;

 private:
  int k_;
  Flavor flavor_;
  BridgeParams bridge_;
};

nlohmann::json to_json(const SectionSpaceSpec& spec);

struct QuadratureConfig {
  int radial_nodes = 0;   // 0 selects 4 k + 64
  int angular_nodes = 0;  // 0 selects a count that resolves every coupled frequency

  int radial_for(const SectionSpaceSpec& spec) const;
  int angular_for(const SectionSpaceSpec& spec, int max_frequency) const;
  /// Explicit counts must be at least 64 radial and 32 angular.
  void validate() const;
};

/// One summand of the log-density: -f_coeff * f_u(s) + log_hessian_coeff * log f_u''(s).
struct PotentialTerm {
  double f_coeff = 0.0;
  double log_hessian_coeff = 0.0;
  SymplecticPotential u;
};

/// Extra factor exp(-epsilon * profile(x) * cos(m theta)) with x the reference
/// moment coordinate.
struct AngularPerturbation {
  double epsilon = 0.0;
  int m = 1;
  Polynomial profile{{1.0}};
};

/// Weight of the reduced inner product
///   <z^i, z^j> = C int int e^{i(i-j) theta} e^{(i+j) s / 2} e^{L(s) - perturbation} ds dtheta
/// with log-density L(s) = sum of terms + s_coeff * s + constant. The
/// quadrature runs in the moment coordinate of `reference`.
struct Weight {
  SymplecticPotential reference;
  std::vector<PotentialTerm> terms;
  double s_coeff = 0.0;
  double constant = 0.0;
  std::optional<AngularPerturbation> angular;

  bool invariant() const noexcept { return !angular || angular->epsilon == 0.0; }
  /// L(s), evaluated with Legendre transforms of every term.
  double log_density(double s) const;
};

/// e^{-k f} f'' (hilb) or e^{s - k f} (adjoint) for the metric with potential u.
Weight endpoint_weight(const SectionSpaceSpec& spec, const SymplecticPotential& u);

/// Interior weight along the geodesic: k f_t for adjoint and plain hilb; for
/// hilb with an enabled bridge, (k - a) f_t + a chi_t + psi_t with
/// psi_t = -(1 - t) log f_0'' - t log f_1''. Reduces to the endpoint weight at
/// t in {0, 1}.
Weight weight_at_t(const MAGeodesicToric& geo, double t, const SectionSpaceSpec& spec);

class GramMatrix {
 public:
  /// Validates symmetry and positive definiteness of `scaled`. A failed
  /// Cholesky factorization raises NumericalFailure naming the smallest pivot.
  GramMatrix(SectionSpaceSpec spec, Eigen::VectorXd log_diag, Eigen::MatrixXd scaled, bool diagonal);

  /// From an explicit positive definite matrix of size spec.dimension().
  static GramMatrix from_raw(const SectionSpaceSpec& spec, const Eigen::MatrixXd& raw);

  const SectionSpaceSpec& spec() const noexcept { return spec_; }
  const Eigen::VectorXd& log_diag() const noexcept { return log_diag_; }
  const Eigen::MatrixXd& scaled() const noexcept { return scaled_; }
  /// Lower Cholesky factor of `scaled`.
  const Eigen::MatrixXd& cholesky_lower() const noexcept { return lower_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  std::string convention_tag() const { return spec_.convention_tag(); }
  int dimension() const noexcept { return static_cast<int>(log_diag_.size()); }

  /// log det of the raw matrix.
  double log_det() const noexcept;
  /// Raw entries; OverflowError when the log-diagonal spread exceeds 500 or an
  /// entry leaves the double range.
  Eigen::MatrixXd raw() const;
  /// D G D for D = diag(e^{log_scale}).
  GramMatrix congruence(const Eigen::VectorXd& log_scale) const;

  nlohmann::json to_json() const;
  /// "j,log_diag" lines with a header.
  std::string log_diag_csv() const;

 private:
  SectionSpaceSpec spec_;
  Eigen::VectorXd log_diag_;
  Eigen::MatrixXd scaled_;
  Eigen::MatrixXd lower_;
  bool diagonal_;
};

/// Gram matrix of the monomial basis, assembled in log space.
GramMatrix gram_matrix(const SectionSpaceSpec& spec, const Weight& weight, const QuadratureConfig& quad = {});

/// Matrix of the symbol-weighted form <xi z^i, z^j>, scaled by the
/// log-diagonal of `frame` (the Gram of the same weight). Diagonal when both
/// the weight and the symbol are invariant.
Eigen::MatrixXd symbol_form_scaled(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                                   const Eigen::VectorXd& frame_log_diag, const QuadratureConfig& quad = {});

struct BridgeCertificate {
  double c = 0.0;
  /// Smallest value of 2 c chi'' - (f_1' - f_0')^2 over the grid.
  double min_margin = 0.0;
  /// Smallest c for which the grid check passes.
  double suggested_c = 0.0;
  bool passed = false;
};

/// Positivity of the (t, s) Hessian of chi_t = t f_1 + (1 - t) f_0 - c t (1 - t)
/// on a 40 x 40 grid (t uniform on [0,1], s at the images of cell midpoints
/// under the midpoint potential).
BridgeCertificate certify_bridge(const MAGeodesicToric& geo, double c);

struct CurvatureCertificate {
  double a = 0.0;
  double c = 0.0;
  /// Smallest eigenvalue of the (t, s) Hessian of a chi + psi over the grid.
  double min_eigenvalue = 0.0;
  /// Smallest a (for the given c) that passes; infinity if none up to 2^20.
  double suggested_a = 0.0;
  bool passed = false;
};

/// Positivity of a chi_t + psi_t for the hilb bridge weight.
CurvatureCertificate certify_bridge_curvature(const MAGeodesicToric& geo, double a, double c);

/// The bridge potential chi_t in log coordinates.
class BridgeWeight {
 public:
  BridgeWeight(const MAGeodesicToric& geo, double t, double c, BridgeCertificate certificate);

  double t() const noexcept { return t_; }
  double c() const noexcept { return c_; }
  const BridgeCertificate& certificate() const noexcept { return certificate_; }

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  /// d/dt chi_t(s) = f_1(s) - f_0(s) - c (1 - 2t).
  double time_derivative(double s) const;

 private:
  SymplecticPotential u0_, u1_;
  double t_, c_;
  BridgeCertificate certificate_;
};

/// chi_t with a certified c; PositivityError carrying the suggested c when the
/// certificate fails. Requires c >= 0.
BridgeWeight bridge_weight(const MAGeodesicToric& geo, double t, double c);

}  // namespace toricq
