#include <omp.h>

#include <algorithm>
#include <vector>

#include "rotopat/kernels.hpp"

namespace rotopat::kernels {

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

namespace omp {

namespace {
constexpr std::ptrdiff_t kBlock = 2048;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t lo = b * kBlock;
    const std::ptrdiff_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y[k] = x[k] + beta * y[k];
  }
}

void hadamard(std::span<const double> d, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y[k] = d[k] * x[k];
  }
}

void disk_apply(const DiskOperator& op, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(op.diag.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ui = 0; ui < n; ++ui) {
    const auto u = static_cast<std::size_t>(ui);
    double s = op.diag[u] * x[u];
    for (std::size_t d = 0; d < 4; ++d) {
      const std::int32_t nb = op.neighbor_table[4 * u + d];
      if (nb >= 0) s -= x[static_cast<std::size_t>(nb)];
    }
    y[u] = s;
  }
}

void disk_wave_step(const DiskOperator& op, std::span<const double> c, std::span<const double> boundary,
                    std::span<const double> prev, std::span<const double> cur, std::span<double> next) {
  const auto n = static_cast<std::ptrdiff_t>(op.diag.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ui = 0; ui < n; ++ui) {
    const auto u = static_cast<std::size_t>(ui);
    double lap = boundary[u] - op.diag[u] * cur[u];
    for (std::size_t d = 0; d < 4; ++d) {
      const std::int32_t nb = op.neighbor_table[4 * u + d];
      if (nb >= 0) lap += cur[static_cast<std::size_t>(nb)];
    }
    next[u] = 2.0 * cur[u] - prev[u] + c[u] * lap;
  }
}

void grid_wave_step(const GridWaveCoefficients& k, std::span<const double> prev, std::span<const double> cur,
                    std::span<double> next) {
  const auto s = static_cast<std::ptrdiff_t>(k.side);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < s; ++j) {
    const auto row = static_cast<std::size_t>(j * s);
    const auto w = static_cast<std::size_t>(s);
    if (j == 0 || j == s - 1) {
      std::fill(next.begin() + static_cast<std::ptrdiff_t>(row), next.begin() + static_cast<std::ptrdiff_t>(row + w), 0.0);
      continue;
    }
    next[row] = 0.0;
    next[row + w - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < w; ++i) {
      const std::size_t q = row + i;
      const double lap = cur[q - 1] + cur[q + 1] + cur[q - w] + cur[q + w] - 4.0 * cur[q];
      next[q] = k.a[q] * cur[q] - k.b[q] * prev[q] + k.c[q] * lap;
    }
  }
}

}  // namespace omp
}  // namespace rotopat::kernels
