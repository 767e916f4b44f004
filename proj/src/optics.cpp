#include "rotopat/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rotopat/cg.hpp"
#include "rotopat/errors.hpp"
#include "rotopat/kernels.hpp"

namespace rotopat {

AbsorptionMap::AbsorptionMap(ScalarField sigma, std::shared_ptr<const DomainMask> mask)
    : field_(std::move(sigma)), mask_(std::move(mask)) {
  if (!mask_) throw std::invalid_argument("absorption map needs a domain mask");
  if (!(field_.grid() == mask_->grid())) throw std::invalid_argument("absorption map and mask grids differ");
  for (std::size_t k = 0; k < field_.size(); ++k) {
    const double v = field_[k];
    if (!std::isfinite(v)) throw std::invalid_argument("absorption map has non-finite entries");
    if (v < 0.0) throw std::invalid_argument("absorption map has negative entries");
    if (v != 0.0 && !mask_->in_omega(k)) throw std::invalid_argument("absorption map is not supported in omega");
  }
}

AbsorptionMap AbsorptionMap::zero(std::shared_ptr<const DomainMask> mask) {
  ScalarField f(mask->grid());
  return AbsorptionMap(std::move(f), std::move(mask));
}

AbsorptionMap project_admissible(const ScalarField& sigma, std::shared_ptr<const DomainMask> mask) {
  ScalarField out(sigma.grid());
  for (std::size_t k : mask->omega_nodes()) out[k] = std::max(0.0, sigma[k]);
  return AbsorptionMap(std::move(out), std::move(mask));
}

double w1inf_norm(const ScalarField& f) {
  const Grid& g = f.grid();
  double grad = 0.0;
  for (int j = 0; j < g.side(); ++j)
    for (int i = 0; i < g.side(); ++i) {
      if (i + 1 < g.side()) grad = std::max(grad, std::abs(f(i + 1, j) - f(i, j)));
      if (j + 1 < g.side()) grad = std::max(grad, std::abs(f(i, j + 1) - f(i, j)));
    }
  return f.max_abs() + grad / g.spacing();
}

DiffusionSolver::DiffusionSolver(const Grid& grid, DiffusionOptions options)
    : stencil_(grid, Disk{{0.0, 0.0}, grid.rho()}), options_(options) {
  if (!(options_.tol > 0.0)) throw std::invalid_argument("diffusion tolerance must be positive");
  if (options_.max_iterations <= 0) options_.max_iterations = 20 * grid.cells();
}

DiffusionSolution DiffusionSolver::solve(const ScalarField& sigma, const BoundaryFunction& g, int rotation) const {
  const ScalarField zero(grid());
  auto sol = solve(sigma, zero, &g);
  sol.rotation = rotation;
  return sol;
}

DiffusionSolution DiffusionSolver::solve(const ScalarField& sigma, const ScalarField& f,
                                         const BoundaryFunction* g) const {
  const Grid& gr = grid();
  const double h2 = gr.spacing() * gr.spacing();
  const int n = stencil_.unknowns();
  const auto& nodes = stencil_.nodes();

  std::vector<double> diag(static_cast<std::size_t>(n));
  std::vector<double> inv_diag(static_cast<std::size_t>(n));
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    if (!(sigma[nodes[uu]] >= 0.0)) throw std::invalid_argument("diffusion solve needs sigma >= 0");
    diag[uu] = stencil_.laplacian_diagonal(u) + h2 * sigma[nodes[uu]];
    inv_diag[uu] = 1.0 / diag[uu];
    b[uu] = h2 * f[nodes[uu]];
  }
  double mean_g = 0.0;
  if (g) {
    for (const auto& arm : stencil_.boundary_arms())
      b[static_cast<std::size_t>(arm.unknown)] += g->at(arm.angle) / arm.theta;
    const auto& gv = g->values();
    mean_g = std::accumulate(gv.begin(), gv.end(), 0.0) / static_cast<double>(gv.size());
  }

  const kernels::DiskOperator op{stencil_.neighbor_table(), diag};
  auto apply = [&op](std::span<const double> x, std::span<double> y) { kernels::omp::disk_apply(op, x, y); };

  std::vector<double> x(static_cast<std::size_t>(n), mean_g);
  const auto cg = conjugate_gradient(apply, inv_diag, b, x, options_.tol, options_.max_iterations);

  std::vector<double> r(static_cast<std::size_t>(n));
  apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double b_norm = std::sqrt(kernels::omp::dot(b, b));
  const double res = b_norm > 0.0 ? std::sqrt(kernels::omp::dot(r, r)) / b_norm : 0.0;
  if (!cg.converged) {
    std::ostringstream os;
    os << "diffusion solve did not converge in " << cg.iterations << " iterations (relative residual " << res
       << ")";
    throw SolverError(os.str(), res, cg.iterations);
  }

  ScalarField u(gr);
  if (g) {
    for (std::size_t k = 0; k < gr.node_count(); ++k) {
      if (stencil_.unknown_of(k) < 0) u[k] = g->at(polar_angle(gr.node(k)));
    }
  }
  stencil_.scatter(x, u.values());
  return {std::move(u), 0, res, cg.iterations};
}

ScalarField DiffusionSolver::harmonic_extension(const BoundaryFunction& g) const {
  const ScalarField zero(grid());
  return solve(zero, zero, &g).u;
}

DiffusionSolution solve_diffusion(const AbsorptionMap& sigma, const BoundaryFunction& g, const Grid& grid,
                                  double tol) {
  if (!(sigma.grid() == grid)) throw std::invalid_argument("absorption map is on a different grid");
  DiffusionSolver solver(grid, {tol, 0});
  return solver.solve(sigma.field(), g);
}

ScalarField harmonic_extension(const BoundaryFunction& g, const Grid& grid, double tol) {
  DiffusionSolver solver(grid, {tol, 0});
  return solver.harmonic_extension(g);
}

std::vector<DiffusionSolution> forward_family(const DiffusionSolver& solver, const ScalarField& sigma,
                                              const AcquisitionSetup& setup, const BoundaryParametrization& param) {
  const int m = setup.rotation_count();
  std::vector<DiffusionSolution> out(static_cast<std::size_t>(m), DiffusionSolution{ScalarField(solver.grid())});
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < m; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = solver.solve(sigma, setup.illumination_for(i, param), i);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<DiffusionSolution> forward_family(const AbsorptionMap& sigma, const AcquisitionSetup& setup,
                                              const BoundaryParametrization& param, DiffusionOptions options) {
  setup.validate();
  DiffusionSolver solver(sigma.grid(), options);
  return forward_family(solver, sigma.field(), setup, param);
}

ScalarField solve_linearized(const DiffusionSolver& solver, const ScalarField& sigma_bg, const ScalarField& u,
                             const ScalarField& delta_sigma) {
  ScalarField rhs(solver.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = -u[k] * delta_sigma[k];
  return solver.solve(sigma_bg, rhs, nullptr).u;
}

double min_over_omega(const ScalarField& u, const DomainMask& mask) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k : mask.omega_nodes()) m = std::min(m, u[k]);
  return m;
}

}  // namespace rotopat
