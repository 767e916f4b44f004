#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rotopat {

struct CgResult {
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for an SPD operator.
/// `x` holds the initial guess on entry. Stops at ||b - Ax|| <= tol ||b||.
CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> inv_diagonal, std::span<const double> b,
                            std::span<double> x, double tol, int max_iterations);

}  // namespace rotopat
