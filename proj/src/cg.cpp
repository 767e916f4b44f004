#include "rotopat/cg.hpp"

#include <cmath>

#include "rotopat/kernels.hpp"

namespace rotopat {

namespace k = kernels::omp;

CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> inv_diagonal, std::span<const double> b,
                            std::span<double> x, double tol, int max_iterations) {
  const std::size_t n = b.size();
  const double b_norm = std::sqrt(k::dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0.0, 0, true};
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double r_norm = std::sqrt(k::dot(r, r));
  if (r_norm <= tol * b_norm) return {r_norm / b_norm, 0, true};

  k::hadamard(inv_diagonal, r, z);
  p = z;
  double rz = k::dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    apply(p, q);
    const double alpha = rz / k::dot(p, q);
    k::axpy(alpha, p, x);
    k::axpy(-alpha, q, r);
    r_norm = std::sqrt(k::dot(r, r));
    if (r_norm <= tol * b_norm) return {r_norm / b_norm, it, true};
    k::hadamard(inv_diagonal, r, z);
    const double rz_next = k::dot(r, z);
    k::xpay(z, rz_next / rz, p);
    rz = rz_next;
  }
  return {r_norm / b_norm, max_iterations, false};
}

}  // namespace rotopat
