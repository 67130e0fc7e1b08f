#include <benchmark/benchmark.h>

#include "evopagator/dyson.hpp"
#include "evopagator/models.hpp"
#include "evopagator/norms.hpp"
#include "evopagator/product_formula.hpp"
#include "evopagator/variation.hpp"

namespace {

using namespace evo;

void BM_MatrixPropagator(benchmark::State& state) {
  auto family = make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(1.0), 1.0);
  const Propagator prop(family, Partition::dyadic(1.0, static_cast<int>(state.range(0))));
  const StateVector y(CVector::Unit(2, 0));
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(1.0, 0.0, y));
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << state.range(0)));
}
BENCHMARK(BM_MatrixPropagator)->DenseRange(6, 14, 4);

void BM_CovariantPropagator(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  PotentialSpec hat;
  auto family = make_covariant_family(make_translation_group(n, 2.0), hat, 1.0);
  const Propagator prop(family, Partition::dyadic(1.0, 6));
  CVector y = CVector::Ones(n);
  const StateVector y0(y);
  prop.apply(1.0, 0.0, y0);  // warm the exponential cache
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(1.0, 0.0, y0));
}
BENCHMARK(BM_CovariantPropagator)->RangeMultiplier(2)->Range(32, 256);

void BM_SpectralShift(benchmark::State& state) {
  const auto group = make_translation_group(static_cast<int>(state.range(0)), 3.14159);
  const CVector y = CVector::Ones(group.size());
  for (auto _ : state) benchmark::DoNotOptimize(group.apply(0.3, y));
}
BENCHMARK(BM_SpectralShift)->RangeMultiplier(4)->Range(256, 16384);

void BM_DysonCovariant(benchmark::State& state) {
  PotentialSpec hat;
  auto family = make_covariant_family(make_translation_group(256, 2.0), hat, 1.0);
  DysonConfig cfg;
  cfg.order = static_cast<int>(state.range(0));
  cfg.nodes_per_unit_time = 512;
  cfg.rule = QuadratureRule::kCubic;
  const StateVector y(CVector::Ones(256));
  for (auto _ : state) benchmark::DoNotOptimize(dyson_propagate(*family, 1.0, 0.0, y, cfg));
}
BENCHMARK(BM_DysonCovariant)->Arg(4)->Arg(12);

void BM_SampledVariation(benchmark::State& state) {
  auto family = make_matrix_family(pauli_z(), pauli_x(), Modulation::weierstrass(0.5, 20, 0.1), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(telescoped_variation(*family, 0.0, 0.1, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SampledVariation)->Arg(8)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
