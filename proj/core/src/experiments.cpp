#include "toricq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "toricq/bergman.hpp"
#include "toricq/errors.hpp"
#include "toricq/finite_geodesics.hpp"
#include "toricq/io.hpp"
#include "toricq/measures.hpp"
#include "toricq/toeplitz.hpp"

namespace toricq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field \"") + key + "\" must be " + what);
  }
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

SymplecticPotential parse_potential(const nlohmann::json& j, const char* name) {
  try {
    return potential_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string(name) + " is not a valid potential: " + e.what());
  }
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

std::string t_label(double t) { return format_double(t); }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j, {"u0", "u1", "flavor", "k_list", "t_grid", "symbols", "bridge", "quadrature", "output_dir"},
                      "config");
  ExperimentConfig c;
  if (!j.contains("u0") || !j.contains("u1")) throw ConfigError("config needs \"u0\" and \"u1\"");
  c.u0 = parse_potential(j.at("u0"), "u0");
  c.u1 = parse_potential(j.at("u1"), "u1");
  if (j.contains("flavor")) c.flavor = flavor_from_string(get_field<std::string>(j, "flavor", "a string"));
  if (!j.contains("k_list")) throw ConfigError("config needs \"k_list\"");
  c.k_list = get_field<std::vector<int>>(j, "k_list", "an array of integers");
  if (c.k_list.empty()) throw ConfigError("k_list must not be empty");
  const int k_min = c.flavor == Flavor::hilb ? 1 : 2;
  for (std::size_t i = 0; i < c.k_list.size(); ++i) {
    if (c.k_list[i] < k_min)
      throw ConfigError("k_list entries must be at least " + std::to_string(k_min) + " for this flavor");
    if (i > 0 && c.k_list[i] <= c.k_list[i - 1]) throw ConfigError("k_list must be strictly ascending");
  }
  if (j.contains("t_grid")) c.t_grid = get_field<std::vector<double>>(j, "t_grid", "an array of numbers");
  for (double t : c.t_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("t_grid entries must lie in [0,1]");
  if (j.contains("symbols")) {
    if (!j.at("symbols").is_array()) throw ConfigError("symbols must be an array");
    for (const auto& s : j.at("symbols")) {
      c.symbol_descriptors.push_back(s);
      c.symbols.push_back(Symbol::from_json(s));
    }
  }
  if (j.contains("bridge")) {
    const auto& b = j.at("bridge");
    if (!b.is_object()) throw ConfigError("bridge must be an object");
    reject_unknown_keys(b, {"enabled", "a", "c"}, "bridge");
    c.bridge.enabled = b.value("enabled", false);
    c.bridge.a = b.value("a", 0.0);
    c.bridge.c = b.value("c", 0.0);
    if (c.bridge.enabled && !(c.bridge.a >= 0.0 && c.bridge.c >= 0.0 && c.bridge.a <= c.k_list.front()))
      throw ConfigError("bridge needs 0 <= a <= min(k_list) and c >= 0");
  }
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    if (!q.is_object()) throw ConfigError("quadrature must be an object");
    reject_unknown_keys(q, {"radial_nodes", "angular_nodes", "limit_grid"}, "quadrature");
    c.quad.radial_nodes = q.value("radial_nodes", 0);
    c.quad.angular_nodes = q.value("angular_nodes", 0);
    c.limit_grid = q.value("limit_grid", c.limit_grid);
    try {
      c.quad.validate();
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
    if (c.limit_grid < 2) throw ConfigError("limit_grid must be at least 2");
  }
  if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir", "a string");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::canonical() const {
  return {{"u0", to_json(u0)},
          {"u1", to_json(u1)},
          {"flavor", to_string(flavor)},
          {"k_list", k_list},
          {"t_grid", t_grid},
          {"symbols", symbol_descriptors},
          {"bridge", {{"enabled", bridge.enabled}, {"a", bridge.a}, {"c", bridge.c}}},
          {"quadrature",
           {{"radial_nodes", quad.radial_nodes}, {"angular_nodes", quad.angular_nodes}, {"limit_grid", limit_grid}}}};
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical().dump()); }

SectionSpaceSpec ExperimentConfig::spec_for(int k) const { return SectionSpaceSpec(k, flavor, bridge); }

// ---------------------------------------------------------------------------
// Rates

RateFit fit_rate(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 3) throw DomainError("fit_rate: needs at least three points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [k, v] : series) {
    if (!(k > 0.0) || !(v > 0.0)) throw DomainError("fit_rate: values must be positive");
    const double x = std::log(k), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(series.size());
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("fit_rate: needs at least two distinct k");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [k, v] : series) {
    const double r = std::log(v) - fit.intercept - fit.slope * std::log(k);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

// ---------------------------------------------------------------------------
// Study

double ResultRow::get(const std::string& name) const {
  for (const auto& [n, v] : values)
    if (n == name) return v;
  return kNaN;
}

bool StudyResult::any_numerical_failure() const {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.numerical_failure; });
}

double subgeodesic_first_moment(const MAGeodesicToric& geo, double t, double c) {
  check_unit_time(t, "subgeodesic_first_moment");
  const auto [a0, b0] = truncated_s_interval(geo.u0());
  const auto [a1, b1] = truncated_s_interval(geo.u1());
  const auto nodes = composite_gauss_legendre(std::min(a0, a1), std::max(b0, b1), 256, 8);
  double mass = 0.0, first = 0.0;
  for (const LineNode& n : nodes) {
    const ConjugatePoint c0 = legendre_transform(geo.u0(), n.t);
    const ConjugatePoint c1 = legendre_transform(geo.u1(), n.t);
    const double w = n.weight * (t * c1.fpp + (1.0 - t) * c0.fpp);
    const double chi_dot = c1.f - c0.f - c * (1.0 - 2.0 * t);
    mass += w;
    first += w * (-chi_dot);
  }
  return first / mass;
}

namespace {

struct StudyContext {
  const ExperimentConfig& config;
  MAGeodesicToric geo;
  ProbabilityMeasure mu;
  double limit_distance;
  double aubin_yau;
};

double squared_l2(const Polynomial& g) {
  return integrate_adaptive([&](double x) { return g(x) * g(x); }, 0.0, 1.0, 1e-12);
}

std::vector<std::string> symbol_names(const ExperimentConfig& config) {
  std::vector<std::string> names;
  for (const Symbol& s : config.symbols) names.push_back(sanitize(s.descriptor));
  return names;
}

std::vector<std::string> value_names(const ExperimentConfig& config) {
  std::vector<std::string> n{"nu_m1", "nu_m2", "nu_m3", "nu_m4", "mu_m1", "mu_m2", "mu_m3", "mu_m4",
                             "w1", "ks", "geodesic_distance", "limit_distance", "z_over_kd", "aubin_yau",
                             "pinch_min", "pinch_max", "g_min", "g_max", "psd_margin_min",
                             "sandwich_m0", "sandwich_m1", "sandwich_ordered_violation",
                             "sandwich_m0_reverse", "sandwich_m1_reverse", "sandwich_reverse_violation"};
  for (const std::string& s : symbol_names(config)) n.push_back("trace_defect[" + s + "]");
  if (config.symbols.size() >= 2) n.push_back("composition_defect");
  for (double t : config.t_grid) n.push_back("sup_deviation[t=" + t_label(t) + "]");
  return n;
}

ResultRow compute_row(const StudyContext& ctx, int k) {
  const ExperimentConfig& cfg = ctx.config;
  ResultRow row;
  row.k = k;
  const std::vector<std::string> names = value_names(cfg);
  for (const std::string& n : names) row.values.emplace_back(n, kNaN);
  auto set = [&](const std::string& name, double v) {
    for (auto& [n, val] : row.values)
      if (n == name) val = v;
  };
  try {
    const SectionSpaceSpec spec = cfg.spec_for(k);
    row.d = spec.dimension();
    const Weight w0 = endpoint_weight(spec, cfg.u0);
    const GramMatrix g0 = gram_matrix(spec, w0, cfg.quad);
    const GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, cfg.u1), cfg.quad);
    const GeodesicSpectrum gs = solve_geodesic(g0, g1);
    const ProbabilityMeasure nu = spectral_measure(gs);

    for (int p = 1; p <= 4; ++p) {
      set("nu_m" + std::to_string(p), moment(nu, p));
      set("mu_m" + std::to_string(p), moment(ctx.mu, p));
    }
    set("w1", wasserstein1(nu, ctx.mu));
    set("ks", ks_distance(nu, ctx.mu));
    set("geodesic_distance", geodesic_distance(gs));
    set("limit_distance", ctx.limit_distance);
    set("z_over_kd", z_functional(gs) / (static_cast<double>(k) * spec.dimension()));
    set("aubin_yau", ctx.aubin_yau);
    set("pinch_min", gs.lambdas().minCoeff() / k);
    set("pinch_max", gs.lambdas().maxCoeff() / k);
    set("g_min", ctx.geo.min_g());
    set("g_max", ctx.geo.max_g());

    double psd = kNaN;
    for (double t : cfg.t_grid) {
      if (t <= 0.0 || t >= 1.0) continue;
      const double m = psd_margin(evaluate_Ht(gs, g0, t), gram_matrix(spec, weight_at_t(ctx.geo, t, spec), cfg.quad));
      psd = std::isnan(psd) ? m : std::min(psd, m);
    }
    set("psd_margin_min", psd);

    if (spec.flavor() == Flavor::adjoint || spec.bridge().enabled) {
      const SandwichResult r = sandwich_check(g0, g1, gs, derivative_toeplitz(ctx.geo, 0.0, spec, cfg.quad),
                                              derivative_toeplitz(ctx.geo, 1.0, spec, cfg.quad));
      set("sandwich_m0", r.m0);
      set("sandwich_m1", r.m1);
      set("sandwich_ordered_violation", r.ordered_violation);
      set("sandwich_m0_reverse", r.m0_reverse);
      set("sandwich_m1_reverse", r.m1_reverse);
      set("sandwich_reverse_violation", r.reverse_violation);
    }

    const std::vector<std::string> snames = symbol_names(cfg);
    for (std::size_t i = 0; i < cfg.symbols.size(); ++i)
      set("trace_defect[" + snames[i] + "]", trace_defect(spec, w0, cfg.symbols[i], cfg.quad));
    if (cfg.symbols.size() >= 2)
      set("composition_defect", composition_defect(spec, w0, cfg.symbols[0], cfg.symbols[1], cfg.quad));

    for (double t : cfg.t_grid)
      set("sup_deviation[t=" + t_label(t) + "]", sup_deviation(ctx.geo, gs, g0, t).value);
  } catch (const NumericalFailure& e) {
    row.ok = false;
    row.numerical_failure = true;
    row.error = e.what();
  } catch (const Error& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> rate_series(
    const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> out;
  auto add = [&](const std::string& name, auto value_of) {
    std::vector<std::pair<double, double>> s;
    for (const ResultRow& r : rows) {
      if (!r.ok) continue;
      const double v = value_of(r);
      if (std::isfinite(v) && v > 0.0) s.emplace_back(r.k, v);
    }
    out.emplace_back(name, std::move(s));
  };
  add("w1", [](const ResultRow& r) { return r.get("w1"); });
  for (int p = 1; p <= 3; ++p) {
    const std::string m = std::to_string(p);
    add("moment_error_p" + m,
        [m](const ResultRow& r) { return std::abs(r.get("nu_m" + m) - r.get("mu_m" + m)); });
  }
  add("z_minus_aubin_yau", [](const ResultRow& r) { return std::abs(r.get("z_over_kd") - r.get("aubin_yau")); });
  add("distance_minus_limit",
      [](const ResultRow& r) { return std::abs(r.get("geodesic_distance") - r.get("limit_distance")); });
  for (const std::string& s : symbol_names(cfg)) {
    const std::string n = "trace_defect[" + s + "]";
    add(n, [n](const ResultRow& r) { return r.get(n); });
  }
  if (cfg.symbols.size() >= 2) add("composition_defect", [](const ResultRow& r) { return r.get("composition_defect"); });
  for (double t : cfg.t_grid) {
    const std::string n = "sup_deviation[t=" + t_label(t) + "]";
    add(n, [n](const ResultRow& r) { return r.get(n); });
  }
  return out;
}

}  // namespace

StudyResult run_study(const ExperimentConfig& config, unsigned workers) {
  StudyContext ctx{config, MAGeodesicToric(config.u0, config.u1), ProbabilityMeasure::dirac(0.0), 0.0, 0.0};
  ctx.mu = limit_measure(ctx.geo, config.limit_grid);
  ctx.limit_distance = std::sqrt(squared_l2(ctx.geo.g()));
  ctx.aubin_yau = aubin_yau_energy(ctx.geo);

  StudyResult result;
  result.config_hash = config.hash();
  result.rows.resize(config.k_list.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.k_list.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < config.k_list.size(); i = next++)
      result.rows[i] = compute_row(ctx, config.k_list[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (const auto& [name, series] : rate_series(config, result.rows))
    if (series.size() >= 3) result.rates.emplace_back(name, fit_rate(series));

  result.subgeodesic_c = config.bridge.enabled ? config.bridge.c : certify_bridge(ctx.geo, 0.0).suggested_c;
  for (double t : config.t_grid)
    result.subgeodesic_first_moment.emplace_back(t, subgeodesic_first_moment(ctx.geo, t, result.subgeodesic_c));
  if (result.subgeodesic_first_moment.size() >= 2) {
    const double diff = result.subgeodesic_first_moment.back().second - result.subgeodesic_first_moment.front().second;
    result.subgeodesic_direction = diff > 1e-12 ? 1 : (diff < -1e-12 ? -1 : 0);
  }
  return result;
}

std::string StudyResult::to_csv() const {
  std::ostringstream out;
  out << "config_hash,version,k,d,status,error";
  if (!rows.empty())
    for (const auto& [n, v] : rows.front().values) out << ',' << n;
  out << '\n';
  for (const ResultRow& r : rows) {
    out << config_hash << ',' << version << ',' << r.k << ',' << r.d << ',' << (r.ok ? "ok" : "error") << ','
        << sanitize(r.error);
    for (const auto& [n, v] : r.values) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

nlohmann::json StudyResult::to_json() const {
  const auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json rows_j = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [n, v] : r.values) values[n] = num(v);
    rows_j.push_back({{"config_hash", config_hash},
                      {"version", version},
                      {"k", r.k},
                      {"d", r.d},
                      {"status", r.ok ? "ok" : "error"},
                      {"error", r.error},
                      {"values", values}});
  }
  nlohmann::json rates_j = nlohmann::json::object();
  for (const auto& [n, f] : rates)
    rates_j[n] = {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"residual", num(f.residual)}};
  nlohmann::json mono = nlohmann::json::array();
  for (const auto& [t, m] : subgeodesic_first_moment) mono.push_back({{"t", t}, {"first_moment", num(m)}});
  return {{"config_hash", config_hash},
          {"version", version},
          {"rows", rows_j},
          {"rates", rates_j},
          {"subgeodesic_monotonicity", {{"c", subgeodesic_c}, {"direction", subgeodesic_direction}, {"samples", mono}}}};
}

// ---------------------------------------------------------------------------
// SVG

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series, bool log_x, bool log_y) {
  constexpr double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 50;
  const auto fx = [&](double x) { return log_x ? std::log10(x) : x; };
  const auto fy = [&](double y) { return log_y ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const ChartSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if ((log_x && !(x > 0)) || (log_y && !(y > 0)) || !std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, fx(x));
      x1 = std::max(x1, fx(x));
      y0 = std::min(y0, fy(y));
      y1 = std::max(y1, fy(y));
    }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const auto px = [&](double x) { return left + (fx(x) - x0) / (x1 - x0) * (width - left - right); };
  const auto py = [&](double y) { return height - bottom - (fy(y) - y0) / (y1 - y0) * (height - top - bottom); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n"
      << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << (log_x ? " (log)" : "") << "</text>\n"
      << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
      << ")\" text-anchor=\"middle\" font-size=\"13\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";
  char buf[64];
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    const double xs = left + (width - left - right) * i / 4.0, ys = height - bottom - (height - top - bottom) * i / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", log_x ? std::pow(10.0, xv) : xv);
    out << "<text x=\"" << xs << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, yv) : yv);
    out << "<text x=\"" << left - 6 << "\" y=\"" << ys + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
        << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[i].points)
      if ((!log_x || x > 0) && (!log_y || y > 0) && std::isfinite(x) && std::isfinite(y))
        out << px(x) << ',' << py(y) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 16 * (i + 1)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << series[i].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

void write_legendre(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const MAGeodesicToric geo(cfg.u0, cfg.u1);
  std::ostringstream out;
  out << "t,s,f,x,fpp,velocity\n";
  for (double t : cfg.t_grid) {
    const SymplecticPotential ut = geo.potential_at(t);
    for (double s : linspace(-20.0, 20.0, 401)) {
      const ConjugatePoint c = legendre_transform(ut, s);
      out << format_double(t) << ',' << format_double(s) << ',' << format_double(c.f) << ','
          << format_double(c.x.x) << ',' << format_double(c.fpp) << ',' << format_double(-geo.g()(c.x.x)) << '\n';
    }
  }
  write_text_file(dir / "legendre.csv", out.str());
}

void write_gram(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  nlohmann::json j = nlohmann::json::object();
  std::ostringstream csv;
  csv << "k,endpoint,j,log_diag\n";
  for (int k : cfg.k_list) {
    const SectionSpaceSpec spec = cfg.spec_for(k);
    const GramMatrix g0 = gram_matrix(spec, endpoint_weight(spec, cfg.u0), cfg.quad);
    const GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, cfg.u1), cfg.quad);
    j[std::to_string(k)] = {{"t0", g0.to_json()}, {"t1", g1.to_json()}};
    for (int e = 0; e < 2; ++e) {
      const GramMatrix& g = e == 0 ? g0 : g1;
      for (int i = 0; i < g.dimension(); ++i)
        csv << k << ',' << e << ',' << i << ',' << format_double(g.log_diag()(i)) << '\n';
    }
  }
  write_text_file(dir / "gram_log_diag.csv", csv.str());
  write_text_file(dir / "gram.json", j.dump(1) + "\n");
}

void write_geodesic(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::ostringstream csv;
  csv << "k,j,lambda_over_k\n";
  nlohmann::json j = nlohmann::json::object();
  for (int k : cfg.k_list) {
    const SectionSpaceSpec spec = cfg.spec_for(k);
    const GramMatrix g0 = gram_matrix(spec, endpoint_weight(spec, cfg.u0), cfg.quad);
    const GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, cfg.u1), cfg.quad);
    const GeodesicSpectrum gs = solve_geodesic(g0, g1);
    const std::string rows = gs.to_csv();
    csv << rows.substr(rows.find('\n') + 1);
    nlohmann::json e = gs.to_json();
    e["z_functional"] = z_functional(gs);
    e["geodesic_distance"] = geodesic_distance(gs);
    j[std::to_string(k)] = e;
  }
  write_text_file(dir / "geodesic.json", j.dump(1) + "\n");
  write_text_file(dir / "geodesic.csv", csv.str());
}

void write_toeplitz(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const MAGeodesicToric geo(cfg.u0, cfg.u1);
  const Symbol wiggle = Symbol::radial([](const MomentPoint& p) { return 0.01 * std::sin(2.0 * kPi * p.x); },
                                       "0.01*sin(2 pi x)");
  std::ostringstream out;
  out << "k,diagnostic_name,value\n";
  for (int k : cfg.k_list) {
    const SectionSpaceSpec spec = cfg.spec_for(k);
    const Weight w0 = endpoint_weight(spec, cfg.u0);
    const GramMatrix gram = gram_matrix(spec, w0, cfg.quad);
    for (const Symbol& xi : cfg.symbols) {
      const std::string name = sanitize(xi.descriptor);
      const ToeplitzOperator t = toeplitz_operator(gram, w0, xi, cfg.quad);
      const Eigen::VectorXd ev = t.eigenvalues();
      out << k << ",trace_defect[" << name << "]," << format_double(trace_defect(spec, w0, xi, cfg.quad)) << '\n';
      out << k << ",eigenvalue_min[" << name << "]," << format_double(ev(0)) << '\n';
      out << k << ",eigenvalue_max[" << name << "]," << format_double(ev(ev.size() - 1)) << '\n';
      out << k << ",perturbation_shift[" << name << "]," << format_double(perturbation_shift(t, wiggle)) << '\n';
    }
    if (cfg.symbols.size() >= 2)
      out << k << ",composition_defect,"
          << format_double(composition_defect(spec, w0, cfg.symbols[0], cfg.symbols[1], cfg.quad)) << '\n';
    if (spec.flavor() == Flavor::adjoint || spec.bridge().enabled) {
      for (double t : {0.0, 1.0}) {
        const Eigen::VectorXd ev = derivative_toeplitz(geo, t, spec, cfg.quad, true).eigenvalues();
        out << k << ",derivative_min[t=" << t_label(t) << "]," << format_double(ev(0)) << '\n';
        out << k << ",derivative_max[t=" << t_label(t) << "]," << format_double(ev(ev.size() - 1)) << '\n';
      }
    }
  }
  write_text_file(dir / "toeplitz.csv", out.str());
}

void write_bergman(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const MAGeodesicToric geo(cfg.u0, cfg.u1);
  std::ostringstream out;
  out << "k,t,sup_deviation,sup_deviation_times_k_over_logk\n";
  for (int k : cfg.k_list) {
    const SectionSpaceSpec spec = cfg.spec_for(k);
    const GramMatrix g0 = gram_matrix(spec, endpoint_weight(spec, cfg.u0), cfg.quad);
    const GramMatrix g1 = gram_matrix(spec, endpoint_weight(spec, cfg.u1), cfg.quad);
    const GeodesicSpectrum gs = solve_geodesic(g0, g1);
    for (double t : cfg.t_grid) {
      const double dev = sup_deviation(geo, gs, g0, t).value;
      const double scaled = k > 1 ? dev * k / std::log(static_cast<double>(k)) : kNaN;
      out << k << ',' << format_double(t) << ',' << format_double(dev) << ',' << format_double(scaled) << '\n';
      const std::vector<double> grid = linspace(-20.0, 20.0, 401);
      const std::vector<double> fs = fs_metric(bergman_kernel_log(gs, g0, t, grid));
      const SymplecticPotential ut = geo.potential_at(t);
      std::ostringstream plot;
      plot << "s,fs_metric,f_t\n";
      for (std::size_t i = 0; i < grid.size(); ++i)
        plot << format_double(grid[i]) << ',' << format_double(fs[i]) << ','
             << format_double(legendre_transform(ut, grid[i]).f) << '\n';
      write_text_file(dir / ("bergman_plot_k" + std::to_string(k) + "_t" + t_label(t) + ".csv"), plot.str());
    }
  }
  write_text_file(dir / "bergman.csv", out.str());
}

bool write_study(const ExperimentConfig& cfg, const std::filesystem::path& dir, unsigned workers) {
  const StudyResult r = run_study(cfg, workers);
  std::ostringstream rates;
  rates << "quantity,slope,intercept,residual\n";
  for (const auto& [n, f] : r.rates)
    rates << n << ',' << format_double(f.slope) << ',' << format_double(f.intercept) << ','
          << format_double(f.residual) << '\n';
  write_text_file(dir / "rates.csv", rates.str());
  write_text_file(dir / "study.json", r.to_json().dump(1) + "\n");

  ChartSeries w1{"W1(nu_k, mu)", {}};
  std::vector<ChartSeries> dev;
  for (const ResultRow& row : r.rows)
    if (row.ok) w1.points.emplace_back(row.k, row.get("w1"));
  for (double t : cfg.t_grid) {
    ChartSeries s{"t=" + t_label(t), {}};
    for (const ResultRow& row : r.rows)
      if (row.ok && row.k > 1)
        s.points.emplace_back(row.k, row.get("sup_deviation[t=" + t_label(t) + "]") * row.k / std::log(row.k));
    dev.push_back(std::move(s));
  }
  write_text_file(dir / "w1_vs_k.svg", svg_line_chart("W1 distance to the limit measure", "k", "W1", {w1}, true, true));
  write_text_file(dir / "sup_deviation_vs_k.svg",
                  svg_line_chart("Bergman sup deviation x k / log k", "k", "deviation k / log k", dev, true, false));
  // Written last so that its presence marks a complete run.
  write_text_file(dir / "study.csv", r.to_csv());
  return r.any_numerical_failure();
}

const char* primary_output(Command c) {
  switch (c) {
    case Command::legendre: return "legendre.csv";
    case Command::gram: return "gram.json";
    case Command::geodesic: return "geodesic.csv";
    case Command::toeplitz: return "toeplitz.csv";
    case Command::bergman: return "bergman.csv";
    case Command::study: return "study.csv";
  }
  return "study.csv";
}

}  // namespace

CommandOutcome execute(Command command, const ExperimentConfig& config, const std::filesystem::path& out_root,
                       bool force, unsigned workers) {
  CommandOutcome outcome;
  outcome.directory = out_root / config.hash();
  if (!force && std::filesystem::exists(outcome.directory / primary_output(command))) {
    outcome.cache_hit = true;
    return outcome;
  }
  nlohmann::json cfg = config.canonical();
  cfg["config_hash"] = config.hash();
  cfg["version"] = kVersionTag;
  write_text_file(outcome.directory / "config.json", cfg.dump(1) + "\n");
  switch (command) {
    case Command::legendre: write_legendre(config, outcome.directory); break;
    case Command::gram: write_gram(config, outcome.directory); break;
    case Command::geodesic: write_geodesic(config, outcome.directory); break;
    case Command::toeplitz: write_toeplitz(config, outcome.directory); break;
    case Command::bergman: write_bergman(config, outcome.directory); break;
    case Command::study: outcome.numerical_failure = write_study(config, outcome.directory, workers); break;
  }
  return outcome;
}

}  // namespace toricq
