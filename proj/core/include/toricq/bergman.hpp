#pragma once

#include <string>
#include <vector>

#include "toricq/finite_geodesics.hpp"
#include "toricq/section_spaces.hpp"
#include "toricq/toric_geometry.hpp"

namespace toricq {

/// Reference metric on the twisting bundle, in log coordinates.
/// hilb: tau = 0. adjoint: tau(s) = s - 2 log(1 + e^s), the Fubini-Study
/// metric on the canonical bundle measured against |dz|^2.
double reference_tau(Flavor flavor, double s) noexcept;
std::string reference_tau_descriptor(Flavor flavor);

struct BergmanEvaluation {
  double t = 0.0;
  int k = 0;
  Flavor flavor = Flavor::hilb;
  std::vector<double> s_grid;
  /// log of the Bergman kernel on the diagonal, pointwise norms of z^j
  /// (hilb) or z^j dz (adjoint) measured with e^{js} resp. e^{(j+1)s}.
  std::vector<double> log_B;
  std::string reference_tau;
};

/// log sum_j e^{-t lambda_j} |s_j|^2 along the finite geodesic from G0, at angle theta.
BergmanEvaluation bergman_kernel_log(const GeodesicSpectrum& geo, const GramMatrix& g0, double t,
                                     const std::vector<double>& s_grid, double theta = 0.0);

/// Bergman kernel of a single Gram matrix, z^T G^{-1} z in log form.
BergmanEvaluation bergman_kernel_direct(const GramMatrix& g, const std::vector<double>& s_grid,
                                        double theta = 0.0);

/// k^{-1} (log B - tau) on the evaluation grid.
std::vector<double> fs_metric(const BergmanEvaluation& eval);

struct SupDeviation {
  double value = 0.0;
  double grid_sup = 0.0;
  double tail_minus = 0.0;  // limit of the deviation as s -> -infinity
  double tail_plus = 0.0;   // limit as s -> +infinity
  int grid_points = 0;
  double half_width = 0.0;  // grid covers [-half_width, half_width]
};

/// sup_s |fs_metric - f_t| for the finite geodesic between the Gram matrices
/// of the endpoint weights. Uniform grid doubled until the sup changes by at
/// most 1%, combined with the exact tail limits. NumericalFailure if 2^16
/// points do not suffice.
SupDeviation sup_deviation(const MAGeodesicToric& geo, const SectionSpaceSpec& spec, double t,
                           const QuadratureConfig& quad = {});
/// Same, reusing an already solved geodesic.
SupDeviation sup_deviation(const MAGeodesicToric& geo, const GeodesicSpectrum& spectrum, const GramMatrix& g0,
                           double t);

}  // namespace toricq
