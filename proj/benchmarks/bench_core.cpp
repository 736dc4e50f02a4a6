#include <benchmark/benchmark.h>

#include "qhj/basis.hpp"
#include "qhj/invariance.hpp"
#include "qhj/numerics.hpp"
#include "qhj/reduced_action.hpp"
#include "qhj/trajectory.hpp"

namespace {

const qhj::PhysicalConstants kUnits{};

void BM_NumerovBasis(benchmark::State& state) {
  const auto points = static_cast<std::size_t>(state.range(0));
  const auto grid = qhj::numerics::uniform_grid(-1.2, 1.2, points);
  const auto v = qhj::PotentialSpec::harmonic(1.0, -1.2, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(qhj::numeric_basis(v, 1.2, kUnits, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NumerovBasis)->Arg(1001)->Arg(4001)->Arg(16001);

void BM_ReducedAction(benchmark::State& state) {
  const auto grid = qhj::numerics::uniform_grid(0.0, 4.0, static_cast<std::size_t>(state.range(0)));
  const auto v = qhj::PotentialSpec::free(0.0, 4.0);
  const auto basis = qhj::analytic_free_basis(0.5, kUnits, grid);
  const qhj::Microstate ms{0.5, 2.0, 0.3, 0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(qhj::build_reduced_action(basis, ms, v, kUnits));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReducedAction)->Arg(1001)->Arg(4001)->Arg(16001);

void BM_IntegrateBd(benchmark::State& state) {
  const auto grid = qhj::numerics::uniform_grid(0.0, 4.0, 4001);
  const auto v = qhj::PotentialSpec::free(0.0, 4.0);
  const auto field = qhj::build_reduced_action(qhj::analytic_free_basis(0.5, kUnits, grid),
                                               {0.5, 2.0, 0.0, 0.0, 0.0}, v, kUnits);
  qhj::BdOptions o;
  o.x_stop = 3.0;
  for (auto _ : state) benchmark::DoNotOptimize(qhj::integrate_bd(field, 0.0, 20.0, v, kUnits, o));
}
BENCHMARK(BM_IntegrateBd);

void BM_FloydStencilAndTime(benchmark::State& state) {
  const auto grid = qhj::numerics::uniform_grid(0.0, 4.0, 4001);
  const auto v = qhj::PotentialSpec::free(0.0, 4.0);
  const qhj::BasisFactory factory = [&grid](double e) {
    return qhj::analytic_free_basis(e, kUnits, grid);
  };
  const qhj::Microstate ms{0.5, 2.0, 0.0, 0.0, 0.0};
  for (auto _ : state) {
    const auto st = qhj::EnergyStencil::build(factory, ms, v, kUnits);
    benchmark::DoNotOptimize(qhj::floyd_time(st, 1.7));
  }
}
BENCHMARK(BM_FloydStencilAndTime);

void BM_ContradictionSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qhj::contradiction_sweep(1.0, 1.0, 1.0, 1.0, n));
}
BENCHMARK(BM_ContradictionSweep)->Arg(101)->Arg(501);

}  // namespace
BENCHMARK_MAIN();
