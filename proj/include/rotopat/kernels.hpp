#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops of the solvers. Every kernel exists twice: a
// plain serial reference and an OpenMP version. Solvers call the OpenMP
// versions; tests hold them to the serial ones and bench/ times both.

namespace rotopat::kernels {

/// Coefficients of one leapfrog step on the full grid with a damping layer:
/// next = a * cur - b * prev + c * lap5(cur) on interior nodes, 0 on edges.
struct GridWaveCoefficients {
  int side = 0;
  std::span<const double> a;
  std::span<const double> b;
  std::span<const double> c;
};

/// Cut-cell disk operator: row u couples to neighbour_table[4u..4u+3]
/// (entries < 0 are cut arms) with unit weight and has diagonal diag[u].
struct DiskOperator {
  std::span<const std::int32_t> neighbor_table;
  std::span<const double> diag;
};

namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpay(std::span<const double> x, double beta, std::span<double> y);
/// y = d .* x
void hadamard(std::span<const double> d, std::span<const double> x, std::span<double> y);
/// y = diag .* x - sum of neighbour values
void disk_apply(const DiskOperator& op, std::span<const double> x, std::span<double> y);
/// next = 2 cur - prev + c .* (sum nbr - diag .* cur + boundary)
void disk_wave_step(const DiskOperator& op, std::span<const double> c, std::span<const double> boundary,
                    std::span<const double> prev, std::span<const double> cur, std::span<double> next);
void grid_wave_step(const GridWaveCoefficients& k, std::span<const double> prev, std::span<const double> cur,
                    std::span<double> next);

}  // namespace serial

namespace omp {

/// Blocked reduction: the summation order depends only on the vector length,
/// never on the thread count, so results are reproducible bit for bit.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double beta, std::span<double> y);
void hadamard(std::span<const double> d, std::span<const double> x, std::span<double> y);
void disk_apply(const DiskOperator& op, std::span<const double> x, std::span<double> y);
void disk_wave_step(const DiskOperator& op, std::span<const double> c, std::span<const double> boundary,
                    std::span<const double> prev, std::span<const double> cur, std::span<double> next);
void grid_wave_step(const GridWaveCoefficients& k, std::span<const double> prev, std::span<const double> cur,
                    std::span<double> next);

}  // namespace omp

/// Threads OpenMP would use for the next parallel region (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace rotopat::kernels
