// Serial reference kernels against their OpenMP versions, plus one whole
// forward propagation. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rotopat/acoustics.hpp"
#include "rotopat/disk_stencil.hpp"
#include "rotopat/kernels.hpp"

using namespace rotopat;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

template <bool Omp>
void BM_dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1), y = random_vector(n, 2);
  for (auto _ : state) {
    const double d = Omp ? kernels::omp::dot(x, y) : kernels::serial::dot(x, y);
    benchmark::DoNotOptimize(d);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * n * 16));
}

template <bool Omp>
void BM_axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1);
  auto y = random_vector(n, 2);
  for (auto _ : state) {
    if (Omp)
      kernels::omp::axpy(1e-9, x, y);
    else
      kernels::serial::axpy(1e-9, x, y);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * n * 24));
}

template <bool Omp>
void BM_disk_apply(benchmark::State& state) {
  const DiskStencil st(Grid::with_cells(static_cast<int>(state.range(0))), Disk{{0.0, 0.0}, 1.0});
  const kernels::DiskOperator op{st.neighbor_table(), st.diagonal()};
  const auto n = static_cast<std::size_t>(st.unknowns());
  const auto x = random_vector(n, 3);
  std::vector<double> y(n);
  for (auto _ : state) {
    if (Omp)
      kernels::omp::disk_apply(op, x, y);
    else
      kernels::serial::disk_apply(op, x, y);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

template <bool Omp>
void BM_grid_wave_step(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0)) + 1;
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  const auto a = random_vector(n, 4), b = random_vector(n, 5), c = random_vector(n, 6);
  const auto prev = random_vector(n, 7), cur = random_vector(n, 8);
  std::vector<double> next(n);
  const kernels::GridWaveCoefficients k{side, a, b, c};
  for (auto _ : state) {
    if (Omp)
      kernels::omp::grid_wave_step(k, prev, cur, next);
    else
      kernels::serial::grid_wave_step(k, prev, cur, next);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

void BM_propagate(benchmark::State& state) {
  const Grid g = Grid::with_cells(static_cast<int>(state.range(0)));
  const ScalarField H = ScalarField::from_function(g, [](Point p) { return cosine_taper(norm(p), 0.2, 0.2); });
  const auto c = SoundSpeedMap::constant(g);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(H, c, 2.4).trace.max_abs());
  state.counters["threads"] = kernels::max_threads();
}

}  // namespace

BENCHMARK(BM_dot<false>)->Name("dot/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_dot<true>)->Name("dot/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_axpy<false>)->Name("axpy/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_axpy<true>)->Name("axpy/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_disk_apply<false>)->Name("disk_apply/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_disk_apply<true>)->Name("disk_apply/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_grid_wave_step<false>)->Name("grid_wave_step/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_grid_wave_step<true>)->Name("grid_wave_step/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_propagate)->Name("propagate")->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
