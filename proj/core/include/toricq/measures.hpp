#pragma once

#include <string>
#include <utility>
#include <vector>

namespace toricq {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Finite atomic probability measure on the real line.
///
/// Atoms are kept sorted by location; locations closer than `kMergeTolerance`
/// to the start of a run are merged into one atom at the weighted mean.
/// Weights are normalized to sum to one on construction.
class ProbabilityMeasure {
 public:
  static constexpr double kMergeTolerance = 1e-12;

  ProbabilityMeasure() = default;
  /// Throws PreconditionError on negative or non-finite weights, non-finite
  /// locations, or zero total mass. Zero-weight atoms are dropped.
  explicit ProbabilityMeasure(std::vector<Atom> atoms);

  static ProbabilityMeasure dirac(double location);
  /// Equal weights on the given locations.
  static ProbabilityMeasure uniform(const std::vector<double>& locations);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double min_location() const;
  double max_location() const;

  /// Image under x -> a x + b.
  ProbabilityMeasure affine_image(double a, double b) const;

 private:
  std::vector<Atom> atoms_;
};

/// Sum of w_i x_i^p; p in [1, 8].
double moment(const ProbabilityMeasure& m, int p);

/// Exact Wasserstein-1 distance: integral of |F1 - F2| over merged breakpoints.
double wasserstein1(const ProbabilityMeasure& a, const ProbabilityMeasure& b);

/// Kolmogorov-Smirnov distance sup |F1 - F2|.
double ks_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b);

/// CSV "location,weight" lines sorted by location, with a header.
std::string to_csv(const ProbabilityMeasure& m);

}  // namespace toricq
