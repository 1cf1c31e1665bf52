#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>

#include "toricq/measures.hpp"
#include "toricq/section_spaces.hpp"
#include "toricq/symbol.hpp"

namespace toricq {

/// Compression of multiplication by a symbol to the section space, written in
/// the orthonormal frame obtained from the Cholesky factor of a reference Gram.
struct ToeplitzOperator {
  SectionSpaceSpec spec;
  Eigen::MatrixXd matrix;
  /// Which norm the frame is orthonormal for ("H0", "H1", "weight", ...).
  std::string frame;
  /// log-diagonal of the Gram matrix defining the frame.
  Eigen::VectorXd frame_log_diag;
  std::string symbol_descriptor;

  // Inputs kept so the operator can be rebuilt with a perturbed symbol.
  Weight weight;
  Symbol symbol;
  QuadratureConfig quad;

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const;
  nlohmann::json to_json() const;
};

/// T = L^{-1} M L^{-T} with M the symbol-weighted form and L L^T the Gram of
/// the same weight (both in scaled coordinates).
ToeplitzOperator toeplitz_operator(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                                   const QuadratureConfig& quad = {}, std::string frame = "weight");
/// As above with the Gram matrix of `weight` already assembled.
ToeplitzOperator toeplitz_operator(const GramMatrix& gram, const Weight& weight, const Symbol& xi,
                                   const QuadratureConfig& quad = {}, std::string frame = "weight");

/// Operator of the t-derivative of the curve of norms at an endpoint t in {0,1},
/// in the endpoint-orthonormal frame ("H0" or "H1"). Adjoint flavor: symbol
/// k g(x). Hilb flavor needs an enabled bridge with a certified c (ContractError
/// otherwise); symbol (k - a) g(x) - a d/dt chi_t - d/dt psi_t. With
/// `divide_by_k` the matrix is divided by k.
ToeplitzOperator derivative_toeplitz(const MAGeodesicToric& geo, double t, const SectionSpaceSpec& spec,
                                     const QuadratureConfig& quad = {}, bool divide_by_k = false);

/// |tr(T)/d - limit| with limit the average of the symbol over the moment
/// interval (and the angle, for non-invariant symbols).
double trace_defect(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                    const QuadratureConfig& quad = {});

/// Largest singular value of T_xi T_eta - T_{xi eta} in the weight frame.
double composition_defect(const SectionSpaceSpec& spec, const Weight& weight, const Symbol& xi,
                          const Symbol& eta, const QuadratureConfig& quad = {});

/// max_j |lambda_j(T_{xi + eps}) - lambda_j(T_xi)| over ascending eigenvalues.
double perturbation_shift(const ToeplitzOperator& t, const Symbol& eps);

/// Uniform measure on eigenvalues / divisor.
ProbabilityMeasure toeplitz_spectral_measure(const ToeplitzOperator& t, double divisor = 1.0);

}  // namespace toricq
