// Serial references against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include "consensus/network_sim.hpp"
#include "consensus/region.hpp"

namespace {

using namespace consensus;

AgentModel planar_model() {
  Matrix a(2, 2), b(2, 1), c(2, 2);
  a << 0.0, 1.0, -1.0, 1.02;
  b << 1.0, 0.0;
  c << 1.0, 0.0, 0.0, 1.0;
  return AgentModel(a, b, c);
}

Matrix planar_l() {
  Matrix l(2, 2);
  l << 0.0, -1.0, 1.0, 0.0;
  return l;
}

void BM_RegionParallel(benchmark::State& state) {
  const AgentModel m = planar_model();
  RegionOptions o;
  o.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scan_region(m, planar_l(), o));
  state.SetItemsProcessed(state.iterations() * o.resolution * o.resolution);
}

void BM_RegionSerial(benchmark::State& state) {
  const AgentModel m = planar_model();
  RegionOptions o;
  o.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scan_region_serial(m, planar_l(), o));
  state.SetItemsProcessed(state.iterations() * o.resolution * o.resolution);
}

// Chain of N agents, each following its predecessor.
ClosedLoopSystem chain_system(int agents) {
  Matrix d = Matrix::Zero(agents, agents);
  d(0, 0) = 1.0;
  for (int i = 1; i < agents; ++i) d(i, i) = d(i, i - 1) = 0.5;
  const AgentModel m = planar_model();
  Matrix k(1, 2);
  k << -0.5, -0.5;
  return ClosedLoopSystem{m, validate_topology(d), ProtocolGains(m, k, planar_l(), DesignMethod::UserSupplied),
                          SimMode::Observer, {}};
}

template <bool Stacked>
void BM_Simulate(benchmark::State& state) {
  const int agents = static_cast<int>(state.range(0));
  const ClosedLoopSystem sys = chain_system(agents);
  const auto x0 = random_initial_states(agents, 2, 1);
  const auto v0 = zero_states(agents, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Stacked ? simulate_stacked(sys, x0, v0, 200) : simulate(sys, x0, v0, 200));
  }
  state.SetItemsProcessed(state.iterations() * agents * 200);
}

void BM_SimulatePerAgent(benchmark::State& state) { BM_Simulate<false>(state); }
void BM_SimulateStacked(benchmark::State& state) { BM_Simulate<true>(state); }

}  // namespace

BENCHMARK(BM_RegionParallel)->Arg(101)->Arg(301)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegionSerial)->Arg(101)->Arg(301)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulatePerAgent)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateStacked)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
