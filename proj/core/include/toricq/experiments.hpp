#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "toricq/section_spaces.hpp"
#include "toricq/symbol.hpp"
#include "toricq/toric_geometry.hpp"

namespace toricq {

inline constexpr const char* kVersionTag = "toricq 0.1.0";

/// Experiment description. JSON schema:
///   {
///     "u0": {"poly": [...]}, "u1": {"poly": [...]},        required
///     "flavor": "hilb" | "adjoint",                         default "hilb"
///     "k_list": [k1, k2, ...],                              required, strictly ascending
///     "t_grid": [t1, ...],                                  default [0, 0.5, 1]
///     "symbols": ["x", "sin(pi x)", {"kind": "poly", ...}], default []
///     "bridge": {"enabled": bool, "a": real, "c": real},   default disabled
///     "quadrature": {"radial_nodes": n, "angular_nodes": n, "limit_grid": n},
///     "output_dir": "path"                                  default "out"
///   }
/// Unknown keys are rejected.
struct ExperimentConfig {
  SymplecticPotential u0, u1;
  Flavor flavor = Flavor::hilb;
  std::vector<int> k_list;
  std::vector<double> t_grid{0.0, 0.5, 1.0};
  std::vector<nlohmann::json> symbol_descriptors;
  std::vector<Symbol> symbols;
  BridgeParams bridge;
  QuadratureConfig quad;
  int limit_grid = 4096;
  std::string output_dir = "out";

  /// ConfigError on any schema or consistency violation.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Normalized serialization without output_dir; keys sorted.
  nlohmann::json canonical() const;
  /// FNV-1a of canonical().dump().
  std::string hash() const;
  SectionSpaceSpec spec_for(int k) const;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log-log residuals
};

/// Least squares of log value against log k. Needs at least three points;
/// DomainError on nonpositive values.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series);

struct ResultRow {
  int k = 0;
  int d = 0;
  bool ok = true;
  std::string error;
  bool numerical_failure = false;
  /// Named diagnostics in a fixed order (same names in every row of a study).
  std::vector<std::pair<std::string, double>> values;

  double get(const std::string& name) const;
};

struct StudyResult {
  std::string config_hash;
  std::string version = kVersionTag;
  std::vector<ResultRow> rows;  // sorted by k
  std::vector<std::pair<std::string, RateFit>> rates;
  /// First moment of the pushforward along the bridge subgeodesic at each t.
  std::vector<std::pair<double, double>> subgeodesic_first_moment;
  /// +1 increasing, -1 decreasing, 0 flat (within 1e-12).
  int subgeodesic_direction = 0;
  double subgeodesic_c = 0.0;

  bool any_numerical_failure() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Evaluates every diagnostic for every k. Rows are computed on `workers`
/// threads (0 picks the hardware concurrency) and do not depend on it.
StudyResult run_study(const ExperimentConfig& config, unsigned workers = 0);

/// Mean of -d/dt chi_t pushed forward by chi_t'' ds, for chi_t the bridge
/// potential with parameter c.
double subgeodesic_first_moment(const MAGeodesicToric& geo, double t, double c);

/// Minimal SVG line chart of one or more (x, y) series.
struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series, bool log_x, bool log_y);

enum class Command { legendre, gram, geodesic, toeplitz, bergman, study };

struct CommandOutcome {
  std::filesystem::path directory;
  bool cache_hit = false;
  bool numerical_failure = false;
};

/// Runs one command and writes its outputs under out_root / config.hash().
/// An existing primary output is reused unless `force` is set.
CommandOutcome execute(Command command, const ExperimentConfig& config, const std::filesystem::path& out_root,
                       bool force, unsigned workers = 0);

}  // namespace toricq
