#include <benchmark/benchmark.h>

#include "toricq/bergman.hpp"
#include "toricq/finite_geodesics.hpp"
#include "toricq/section_spaces.hpp"
#include "toricq/toric_geometry.hpp"

using namespace toricq;

namespace {

const SymplecticPotential& quadratic() {
  static const SymplecticPotential u({0.0, 0.0, 0.5});
  return u;
}

void BM_LegendreTransform(benchmark::State& state) {
  double s = -20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(legendre_transform(quadratic(), s));
    s = s > 20.0 ? -20.0 : s + 0.37;
  }
}
BENCHMARK(BM_LegendreTransform);

void BM_GramInvariant(benchmark::State& state) {
  const SectionSpaceSpec spec(static_cast<int>(state.range(0)), Flavor::hilb);
  const Weight w = endpoint_weight(spec, quadratic());
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(spec, w));
}
BENCHMARK(BM_GramInvariant)->RangeMultiplier(4)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_GramAngular(benchmark::State& state) {
  const SectionSpaceSpec spec(static_cast<int>(state.range(0)), Flavor::hilb);
  Weight w = endpoint_weight(spec, quadratic());
  w.angular = AngularPerturbation{0.1, 1, Polynomial({0.0, 1.0})};
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(spec, w));
}
BENCHMARK(BM_GramAngular)->RangeMultiplier(4)->Range(16, 64)->Unit(benchmark::kMillisecond);

void BM_SolveGeodesicDense(benchmark::State& state) {
  const SectionSpaceSpec spec(static_cast<int>(state.range(0)), Flavor::hilb);
  Weight w0 = endpoint_weight(spec, SymplecticPotential::guillemin());
  Weight w1 = endpoint_weight(spec, quadratic());
  w1.angular = AngularPerturbation{0.1, 1, Polynomial({0.0, 1.0})};
  const GramMatrix g0 = gram_matrix(spec, w0), g1 = gram_matrix(spec, w1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_geodesic(g0, g1));
}
BENCHMARK(BM_SolveGeodesicDense)->RangeMultiplier(4)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_SupDeviation(benchmark::State& state) {
  const MAGeodesicToric geo(SymplecticPotential::guillemin(), quadratic());
  const SectionSpaceSpec spec(static_cast<int>(state.range(0)), Flavor::hilb);
  for (auto _ : state) benchmark::DoNotOptimize(sup_deviation(geo, spec, 0.5));
}
BENCHMARK(BM_SupDeviation)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
