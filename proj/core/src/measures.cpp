#include "toricq/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toricq/errors.hpp"
#include "toricq/io.hpp"

namespace toricq {

ProbabilityMeasure::ProbabilityMeasure(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.weight) || a.weight < 0.0)
      throw PreconditionError("ProbabilityMeasure: atoms need finite locations and nonnegative weights");
    total += a.weight;
  }
  if (!(total > 0.0)) throw PreconditionError("ProbabilityMeasure: total mass must be positive");

  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });

  atoms_.reserve(atoms.size());
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double start = atoms[i].location;
    double w = 0.0, wx = 0.0;
    std::size_t j = i;
    for (; j < atoms.size() && atoms[j].location - start <= kMergeTolerance; ++j) {
      w += atoms[j].weight;
      wx += atoms[j].weight * atoms[j].location;
    }
    const double loc = (j - i == 1) ? start : wx / w;
    atoms_.push_back({loc, w / total});
    i = j;
  }
}

ProbabilityMeasure ProbabilityMeasure::dirac(double location) {
  return ProbabilityMeasure({{location, 1.0}});
}

ProbabilityMeasure ProbabilityMeasure::uniform(const std::vector<double>& locations) {
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  for (double x : locations) atoms.push_back({x, 1.0});
  return ProbabilityMeasure(std::move(atoms));
}

double ProbabilityMeasure::min_location() const {
  if (atoms_.empty()) throw PreconditionError("empty measure");
  return atoms_.front().location;
}

double ProbabilityMeasure::max_location() const {
  if (atoms_.empty()) throw PreconditionError("empty measure");
  return atoms_.back().location;
}

ProbabilityMeasure ProbabilityMeasure::affine_image(double a, double b) const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const Atom& at : atoms_) out.push_back({a * at.location + b, at.weight});
  return ProbabilityMeasure(std::move(out));
}

double moment(const ProbabilityMeasure& m, int p) {
  if (p < 1 || p > 8) throw DomainError("moment: order must lie in [1, 8]");
  double acc = 0.0;
  for (const Atom& a : m.atoms()) acc += a.weight * std::pow(a.location, p);
  return acc;
}

namespace {

// Walks the merged breakpoints of two CDFs and hands each constant piece
// (left, right, F_a - F_b) to `visit`.
template <typename Visit>
void walk_cdf_difference(const ProbabilityMeasure& a, const ProbabilityMeasure& b, Visit visit) {
  const auto& xa = a.atoms();
  const auto& xb = b.atoms();
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  double prev = 0.0;
  bool started = false;
  while (i < xa.size() || j < xb.size()) {
    const double next = (j >= xb.size() || (i < xa.size() && xa[i].location <= xb[j].location))
                            ? xa[i].location
                            : xb[j].location;
    if (started) visit(prev, next, fa - fb);
    while (i < xa.size() && xa[i].location == next) fa += xa[i++].weight;
    while (j < xb.size() && xb[j].location == next) fb += xb[j++].weight;
    prev = next;
    started = true;
  }
}

}  // namespace

double wasserstein1(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
  double acc = 0.0;
  walk_cdf_difference(a, b, [&](double l, double r, double d) { acc += std::abs(d) * (r - l); });
  return acc;
}

double ks_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
  double best = 0.0;
  walk_cdf_difference(a, b, [&](double, double, double d) { best = std::max(best, std::abs(d)); });
  return std::min(best, 1.0);
}

std::string to_csv(const ProbabilityMeasure& m) {
  std::string out = "location,weight\n";
  for (const Atom& a : m.atoms()) out += format_double(a.location) + "," + format_double(a.weight) + "\n";
  return out;
}

}  // namespace toricq
