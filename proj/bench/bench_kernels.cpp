// Serial reference kernels against their OpenMP counterparts.
//   ./edicke_bench --benchmark_filter=Assemble
// OMP_NUM_THREADS controls the parallel variants.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "edicke/histogram.hpp"
#include "edicke/model.hpp"
#include "edicke/spectrum.hpp"

namespace {

edicke::ModelParams params_for(int n_cutoff) {
  edicke::ModelParams p;
  p.j = 8;
  p.n_cutoff = n_cutoff;
  p.lambda = 0.7;
  p.kappa = 0.5;
  return p;
}

void BM_AssembleReference(benchmark::State& state) {
  const auto p = params_for(static_cast<int>(state.range(0)));
  const auto basis = edicke::enumerate_basis(p, edicke::Parity::Even);
  for (auto _ : state) {
    auto h = edicke::build_hamiltonian_reference(p, basis);
    benchmark::DoNotOptimize(h.entries.data());
  }
  state.counters["dim"] = static_cast<double>(basis.size());
}

void BM_AssembleParallel(benchmark::State& state) {
  const auto p = params_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto h = edicke::build_hamiltonian(p, edicke::Parity::Even);
    benchmark::DoNotOptimize(h.entries.data());
  }
}

std::vector<double> gaussian_sample(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

void BM_HistogramSerial(benchmark::State& state) {
  const auto v = gaussian_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto c = edicke::histogram_counts_serial(v, {-5.0, 5.0, 201});
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HistogramParallel(benchmark::State& state) {
  const auto v = gaussian_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto c = edicke::histogram_counts(v, {-5.0, 5.0, 201});
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DiagonalizeValues(benchmark::State& state) {
  const auto h = edicke::build_hamiltonian(params_for(static_cast<int>(state.range(0))),
                                           edicke::Parity::Even);
  for (auto _ : state) {
    auto eig = edicke::diagonalize(h, false);
    benchmark::DoNotOptimize(eig.values.data());
  }
  state.counters["dim"] = static_cast<double>(h.dim());
}

void BM_DiagonalizeVectors(benchmark::State& state) {
  const auto h = edicke::build_hamiltonian(params_for(static_cast<int>(state.range(0))),
                                           edicke::Parity::Even);
  for (auto _ : state) {
    auto eig = edicke::diagonalize(h, true);
    benchmark::DoNotOptimize(eig.vectors->data());
  }
  state.counters["dim"] = static_cast<double>(h.dim());
}

}  // namespace

BENCHMARK(BM_AssembleReference)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Arg(40)->Arg(80)->Arg(320)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramSerial)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_HistogramParallel)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_DiagonalizeValues)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiagonalizeVectors)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  edicke::select_backend_kernels(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
