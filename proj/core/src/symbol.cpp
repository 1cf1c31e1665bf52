#include "toricq/symbol.hpp"

#include <algorithm>
#include <cmath>

#include "toricq/errors.hpp"

namespace toricq {

Symbol Symbol::constant(double c) {
  return {[c](const MomentPoint&, double) { return c; }, true, 0, "const(" + std::to_string(c) + ")"};
}

Symbol Symbol::radial(std::function<double(const MomentPoint&)> f, std::string descriptor) {
  return {[f = std::move(f)](const MomentPoint& p, double) { return f(p); }, true, 0,
          std::move(descriptor)};
}

Symbol Symbol::polynomial(const Polynomial& p) {
  std::string d = "poly[";
  for (std::size_t i = 0; i < p.coeffs().size(); ++i)
    d += (i ? "," : "") + std::to_string(p.coeffs()[i]);
  d += "]";
  return radial([p](const MomentPoint& m) { return p(m.x); }, std::move(d));
}

Symbol Symbol::angular(std::function<double(const MomentPoint&)> amplitude, int m,
                       std::string descriptor) {
  return {[a = std::move(amplitude), m](const MomentPoint& p, double th) { return a(p) * std::cos(m * th); },
          false, m, std::move(descriptor)};
}

Symbol operator+(const Symbol& a, const Symbol& b) {
  return {[a, b](const MomentPoint& p, double th) { return a(p, th) + b(p, th); },
          a.invariant && b.invariant, std::max(a.angular_degree, b.angular_degree),
          "(" + a.descriptor + "+" + b.descriptor + ")"};
}

Symbol operator*(const Symbol& a, const Symbol& b) {
  return {[a, b](const MomentPoint& p, double th) { return a(p, th) * b(p, th); },
          a.invariant && b.invariant, a.angular_degree + b.angular_degree,
          "(" + a.descriptor + "*" + b.descriptor + ")"};
}

Symbol operator*(double c, const Symbol& a) {
  return {[a, c](const MomentPoint& p, double th) { return c * a(p, th); }, a.invariant,
          a.angular_degree, std::to_string(c) + "*" + a.descriptor};
}

namespace {

Symbol sin_pi(double freq, std::string name) {
  return Symbol::radial([freq](const MomentPoint& p) { return std::sin(freq * kPi * p.x); },
                        std::move(name));
}

}  // namespace

Symbol Symbol::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "x") return radial([](const MomentPoint& p) { return p.x; }, s);
    if (s == "x^2") return radial([](const MomentPoint& p) { return p.x * p.x; }, s);
    if (s == "x^3") return radial([](const MomentPoint& p) { return p.x * p.x * p.x; }, s);
    if (s == "exp(x)") return radial([](const MomentPoint& p) { return std::exp(p.x); }, s);
    if (s == "sin(pi x)") return sin_pi(1.0, s);
    if (s == "sin(2 pi x)") return sin_pi(2.0, s);
    if (s == "|x-1/2|") return radial([](const MomentPoint& p) { return std::abs(p.x - 0.5); }, s);
    if (s == "1") return constant(1.0);
    throw ConfigError("unknown symbol shorthand '" + s + "'");
  }
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("symbol descriptor needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "poly") return polynomial(Polynomial(j.at("coeffs").get<std::vector<double>>()));
  if (kind == "sin_pi") {
    const double f = j.value("freq", 1.0);
    return sin_pi(f, "sin(" + std::to_string(f) + " pi x)");
  }
  if (kind == "abs") {
    const double c = j.value("center", 0.5);
    return radial([c](const MomentPoint& p) { return std::abs(p.x - c); },
                  "|x-" + std::to_string(c) + "|");
  }
  if (kind == "constant") return constant(j.at("value").get<double>());
  throw ConfigError("unknown symbol kind '" + kind + "'");
}

double moment_integral(const Symbol& xi) {
  if (!xi.invariant) throw PreconditionError("moment_integral: symbol must be invariant");
  return integrate_adaptive([&](double x) { return xi({x, 1.0 - x}); }, 0.0, 1.0, 1e-12);
}

double sup_norm(const Symbol& xi) {
  constexpr int nx = 4001;
  const int nth = xi.invariant ? 1 : std::max(64, 16 * xi.angular_degree);
  double best = 0.0;
  for (int i = 0; i <= nx; ++i) {
    const double x = static_cast<double>(i) / nx;
    for (int l = 0; l < nth; ++l)
      best = std::max(best, std::abs(xi({x, 1.0 - x}, 2.0 * kPi * l / nth)));
  }
  return best;
}

}  // namespace toricq
