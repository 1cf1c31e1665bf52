#pragma once

// Geodesics in the cone of positive definite forms. The geodesic from G0 to G1
// is H^t = G0^{1/2} (G0^{-1/2} G1 G0^{-1/2})^t G0^{1/2}; in a basis that is
// G0-orthonormal and G1-diagonal it is diag(e^{t lambda_j}).

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>

#include "toricq/measures.hpp"
#include "toricq/section_spaces.hpp"
#include "toricq/toeplitz.hpp"

namespace toricq {

class GeodesicSpectrum {
 public:
  /// Ascending pencil log-eigenvalues (center shift already added back).
  const Eigen::VectorXd& lambdas() const noexcept { return lambdas_; }
  /// Columns are G0-orthonormal and G1-diagonal, in the scaled coordinates of
  /// G0 (raw coefficients are diag(e^{-log_diag0 / 2}) times these).
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  /// Same vectors written in the orthonormal frame of the Cholesky factor of G0.
  const Eigen::MatrixXd& frame_vectors() const noexcept { return q_; }
  double center_shift() const noexcept { return center_shift_; }
  const SectionSpaceSpec& spec() const noexcept { return spec_; }
  const Eigen::VectorXd& log_diag0() const noexcept { return log_diag0_; }
  const Eigen::VectorXd& log_diag1() const noexcept { return log_diag1_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  int dimension() const noexcept { return static_cast<int>(lambdas_.size()); }

  nlohmann::json to_json() const;
  /// "k,j,lambda_over_k" rows with a header.
  std::string to_csv() const;

 private:
  friend GeodesicSpectrum solve_geodesic(const GramMatrix& g0, const GramMatrix& g1);
  explicit GeodesicSpectrum(SectionSpaceSpec spec) : spec_(std::move(spec)) {}

  SectionSpaceSpec spec_;
  Eigen::VectorXd lambdas_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd q_;
  double center_shift_ = 0.0;
  Eigen::VectorXd log_diag0_, log_diag1_;
  bool diagonal_ = false;
};

/// Symmetric-definite pencil (G1, G0). ContractError on mismatched spec or
/// convention; OverflowError when the centered log-diagonal spread exceeds
/// the double range.
GeodesicSpectrum solve_geodesic(const GramMatrix& g0, const GramMatrix& g1);

/// H^t in the monomial basis.
GramMatrix evaluate_Ht(const GeodesicSpectrum& geo, const GramMatrix& g0, double t);

/// Uniform measure on lambda_j / k.
ProbabilityMeasure spectral_measure(const GeodesicSpectrum& geo);
/// sum_j lambda_j = log det G1 - log det G0.
double z_functional(const GeodesicSpectrum& geo);
/// sqrt(sum_j (lambda_j / k)^2 / d).
double geodesic_distance(const GeodesicSpectrum& geo);

/// (smallest eigenvalue of the pencil (Gb, Ga)) - 1; nonnegative iff Ga <= Gb.
double psd_margin(const GramMatrix& ga, const GramMatrix& gb);

/// Tangent endomorphism A = H^{-1} dH/dt written in the orthonormal frame of
/// G0 (`at_one` false) or of G1 (`at_one` true).
Eigen::MatrixXd tangent_operator(const GeodesicSpectrum& geo, const GramMatrix& frame_gram, bool at_one);

struct SandwichResult {
  double m0 = 0.0;  // smallest eigenvalue of A - T0 in the G0 frame
  double m1 = 0.0;  // smallest eigenvalue of T1 - A in the G1 frame
  Eigen::VectorXd tau0, lambda, tau1;  // ascending
  /// max_j max(tau0_j - lambda_j, lambda_j - tau1_j); nonpositive when ordered.
  double ordered_violation = 0.0;
  // The same comparisons with the orientation reversed: T1 <= A <= T0.
  double m0_reverse = 0.0;  // smallest eigenvalue of T0 - A in the G0 frame
  double m1_reverse = 0.0;  // smallest eigenvalue of A - T1 in the G1 frame
  double reverse_violation = 0.0;  // max_j max(lambda_j - tau0_j, tau1_j - lambda_j)
};

/// Compares A with endpoint derivative operators T0 (G0 frame) and T1 (G1
/// frame). ContractError if the operators were built in other frames.
SandwichResult sandwich_check(const GramMatrix& g0, const GramMatrix& g1, const GeodesicSpectrum& geo,
                              const ToeplitzOperator& t0, const ToeplitzOperator& t1);

}  // namespace toricq
