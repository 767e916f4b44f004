#pragma once

#include <memory>
#include <vector>

#include "rotopat/disk_stencil.hpp"
#include "rotopat/geometry.hpp"
#include "rotopat/grid.hpp"

namespace rotopat {

/// Absorption coefficient sigma >= 0, vanishing outside Omega.
class AbsorptionMap {
 public:
  /// Validates nonnegativity, finiteness and support; throws std::invalid_argument.
  AbsorptionMap(ScalarField sigma, std::shared_ptr<const DomainMask> mask);
  static AbsorptionMap zero(std::shared_ptr<const DomainMask> mask);

  const ScalarField& field() const { return field_; }
  const DomainMask& mask() const { return *mask_; }
  const std::shared_ptr<const DomainMask>& mask_ptr() const { return mask_; }
  const Grid& grid() const { return field_.grid(); }

 private:
  ScalarField field_;
  std::shared_ptr<const DomainMask> mask_;
};

/// Projects onto admissible absorption maps: clamps negatives to zero and
/// zeroes every node outside Omega.
AbsorptionMap project_admissible(const ScalarField& sigma, std::shared_ptr<const DomainMask> mask);

/// max |f| over nodes plus max |forward difference| / h over edges.
double w1inf_norm(const ScalarField& f);

struct DiffusionOptions {
  double tol = 1e-10;
  /// 0 selects 20 * cells per side.
  int max_iterations = 0;
};

struct DiffusionSolution {
  ScalarField u;
  int rotation = 0;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Solves -Lap u + sigma u = f in B_rho, u = g on the circle.
///
/// Five-point Laplacian with cut-cell arms at the circle (ghost values
/// extrapolated from the Dirichlet data), giving a symmetric positive
/// definite system solved by Jacobi-preconditioned conjugate gradients.
/// Nodes outside the ball carry the boundary value at their polar angle.
class DiffusionSolver {
 public:
  explicit DiffusionSolver(const Grid& grid, DiffusionOptions options = {});

  const Grid& grid() const { return stencil_.grid(); }
  const DiskStencil& stencil() const { return stencil_; }
  const DiffusionOptions& options() const { return options_; }

  DiffusionSolution solve(const ScalarField& sigma, const BoundaryFunction& g, int rotation = 0) const;
  /// General right-hand side f; `g` may be null for homogeneous data.
  DiffusionSolution solve(const ScalarField& sigma, const ScalarField& f, const BoundaryFunction* g) const;
  ScalarField harmonic_extension(const BoundaryFunction& g) const;

 private:
  DiskStencil stencil_;
  DiffusionOptions options_;
};

DiffusionSolution solve_diffusion(const AbsorptionMap& sigma, const BoundaryFunction& g, const Grid& grid,
                                  double tol);
ScalarField harmonic_extension(const BoundaryFunction& g, const Grid& grid, double tol);

/// u_i for every rotation with data g_i(x) = g(R_i x). Rotations run concurrently.
std::vector<DiffusionSolution> forward_family(const AbsorptionMap& sigma, const AcquisitionSetup& setup,
                                              const BoundaryParametrization& param,
                                              DiffusionOptions options = {});
std::vector<DiffusionSolution> forward_family(const DiffusionSolver& solver, const ScalarField& sigma,
                                              const AcquisitionSetup& setup, const BoundaryParametrization& param);

/// delta u solving -Lap du + sigma_bg du = -u du_sigma, du = 0 on the circle.
ScalarField solve_linearized(const DiffusionSolver& solver, const ScalarField& sigma_bg, const ScalarField& u,
                             const ScalarField& delta_sigma);

/// Minimum of u over the omega nodes (the empirical beta).
double min_over_omega(const ScalarField& u, const DomainMask& mask);

}  // namespace rotopat
