#include "rotopat/kernels.hpp"

namespace rotopat::kernels::serial {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void hadamard(std::span<const double> d, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
}

void disk_apply(const DiskOperator& op, std::span<const double> x, std::span<double> y) {
  const std::size_t n = op.diag.size();
  for (std::size_t u = 0; u < n; ++u) {
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
  const std::size_t n = op.diag.size();
  for (std::size_t u = 0; u < n; ++u) {
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
  const std::size_t s = static_cast<std::size_t>(k.side);
  for (std::size_t i = 0; i < s; ++i) {
    next[i] = 0.0;
    next[(s - 1) * s + i] = 0.0;
  }
  for (std::size_t j = 1; j + 1 < s; ++j) {
    const std::size_t row = j * s;
    next[row] = 0.0;
    next[row + s - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < s; ++i) {
      const std::size_t q = row + i;
      const double lap = cur[q - 1] + cur[q + 1] + cur[q - s] + cur[q + s] - 4.0 * cur[q];
      next[q] = k.a[q] * cur[q] - k.b[q] * prev[q] + k.c[q] * lap;
    }
  }
}

}  // namespace rotopat::kernels::serial
