#include <benchmark/benchmark.h>

#include "critmet/dynamics.hpp"
#include "critmet/eig.hpp"
#include "critmet/metrology.hpp"
#include "critmet/model.hpp"
#include "critmet/thermal.hpp"

using namespace critmet;

static void BM_BuildHamiltonian(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_hamiltonian(p));
  }
  state.SetLabel("dim " + std::to_string(p.dim()));
}
BENCHMARK(BM_BuildHamiltonian)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

static void BM_MatVec(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.1};
  const SparseHermitian h = build_hamiltonian(p);
  const Vector in = Vector::Ones(static_cast<Eigen::Index>(p.dim())).normalized();
  Vector out(in.size());
  for (auto _ : state) {
    h.apply(in, out);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.nnz()));
}
BENCHMARK(BM_MatVec)->Arg(10)->Arg(14)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_GroundState(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.0};
  const SparseHermitian h = build_hamiltonian(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_state(h));
  }
}
BENCHMARK(BM_GroundState)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_KrylovStep(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.0};
  const SparseHermitian h = build_hamiltonian(p);
  const Vector v = ground_state(h).vectors.front().amplitudes();
  for (auto _ : state) {
    benchmark::DoNotOptimize(krylov_evolve(h, v, 0.1));
  }
}
BENCHMARK(BM_KrylovStep)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

static void BM_ChiFiniteDifference(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi_finite_difference(p));
  }
}
BENCHMARK(BM_ChiFiniteDifference)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_DenseSpectrum(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.1};
  const SparseHermitian h = build_hamiltonian(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diagonalize_real(h));
  }
}
BENCHMARK(BM_DenseSpectrum)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_UhlmannFidelity(benchmark::State& state) {
  const ChainParams p{static_cast<int>(state.range(0)), 0.0, 0.0};
  ThermalFamily family(p);
  const MixedState a = family.gibbs(0.0, 0.5);
  const MixedState b = family.gibbs(1e-3, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(uhlmann_fidelity(a, b));
  }
}
BENCHMARK(BM_UhlmannFidelity)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
