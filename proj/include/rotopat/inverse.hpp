#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rotopat/acoustics.hpp"
#include "rotopat/geometry.hpp"
#include "rotopat/optics.hpp"
#include "rotopat/phantom.hpp"

namespace rotopat {

/// (sum |f|^2 h^2 + sum |grad_h f|^2 h^2)^(1/2), forward differences over the
/// whole grid (fields supported in Omega give the H^1_0(Omega) norm).
double h1_norm_field(const ScalarField& f);

/// H^1 norm over [0, T] x circle: values, time differences and arc-length
/// differences (periodic), with trapezoid weights in time.
double h1_norm_trace(const BoundaryTrace& d, double ds);

/// C_Omega = lambda_1^(-1/2) for the Dirichlet Laplacian on the Omega nodes,
/// by inverse power iteration.
double poincare_constant(const DomainMask& mask, double tol = 1e-6);

struct ForwardModelOptions {
  DiffusionOptions diffusion{};
  WaveOptions wave{};
};

/// sigma -> (u_i[sigma], chi_i Lambda(sigma u_i)) and the adjoint-like
/// back-projection A, for one grid, setup and sound speed.
class ForwardModel {
 public:
  ForwardModel(std::shared_ptr<const DomainMask> mask, AcquisitionSetup setup, SoundSpeedMap c,
               ForwardModelOptions options = {});

  const Grid& grid() const { return mask_->grid(); }
  const std::shared_ptr<const DomainMask>& mask() const { return mask_; }
  const AcquisitionSetup& setup() const { return setup_; }
  const SoundSpeedMap& sound_speed() const { return wave_.sound_speed(); }
  const BoundaryParametrization& boundary() const { return wave_.boundary(); }
  const TimeAxis& time() const { return wave_.time(); }
  int rotation_count() const { return setup_.rotation_count(); }
  const BoundaryTrace& cutoff(int i) const { return chi_.at(static_cast<std::size_t>(i)); }
  const DiffusionSolver& diffusion() const { return diffusion_; }
  const WaveSolver& wave() const { return wave_; }

  std::vector<DiffusionSolution> fields(const ScalarField& sigma) const;
  /// chi_i Lambda(H) for one rotation.
  BoundaryTrace measure_source(int i, const ScalarField& H) const;
  /// chi_i Lambda(sigma u_i) for every rotation, given the fields.
  std::vector<BoundaryTrace> data(const ScalarField& sigma, const std::vector<DiffusionSolution>& u) const;
  /// chi_i Lambda*_i(sigma), solving for the fields first.
  std::vector<BoundaryTrace> data(const ScalarField& sigma) const;
  /// A applied to a trace; the result is restricted to the closed ball.
  ScalarField back_project(const BoundaryTrace& h) const;
  BoundaryTrace zero_trace() const { return BoundaryTrace(time(), boundary().size()); }

 private:
  std::shared_ptr<const DomainMask> mask_;
  AcquisitionSetup setup_;
  DiffusionSolver diffusion_;
  WaveSolver wave_;
  std::vector<BoundaryTrace> chi_;
};

/// Sum over rotations of chi_i Lambda(u_i delta), the sum of its
/// higher-order companion chi_i Lambda(sigma delta_u_i), and
/// kappa(delta) = A(sum chi_i Lambda(u_i delta)) restricted to Omega.
class LinearizedOperator {
 public:
  LinearizedOperator(const ForwardModel& model, const ScalarField& background);

  const ForwardModel& model() const { return *model_; }
  const ScalarField& background() const { return background_; }
  const std::vector<DiffusionSolution>& fields() const { return fields_; }

  BoundaryTrace principal_data(const ScalarField& delta) const;
  BoundaryTrace higher_order_data(const ScalarField& delta) const;
  /// Single-rotation principal data chi_j Lambda(u_j delta).
  BoundaryTrace rotation_data(int j, const ScalarField& delta) const;
  ScalarField apply(const ScalarField& delta) const;

 private:
  const ForwardModel* model_;
  ScalarField background_;
  std::vector<DiffusionSolution> fields_;
};

/// Hat basis of a coarse grid restricted to Omega, evaluated on the fine grid.
class CoarseBasis {
 public:
  CoarseBasis(const Grid& coarse, const DomainMask& fine_mask);

  const Grid& coarse() const { return coarse_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  Point node(int j) const { return coarse_.node(nodes_[static_cast<std::size_t>(j)]); }
  /// Fine-grid field of sum_j v_j phi_j, zero outside Omega.
  ScalarField expand(const Eigen::VectorXd& v) const;
  /// Samples a fine-grid field at the coarse Omega nodes.
  Eigen::VectorXd sample(const ScalarField& f) const;

 private:
  Grid coarse_;
  DomainMask mask_;
  std::vector<std::size_t> nodes_;
};

struct KappaMatrix {
  Eigen::MatrixXd matrix;
  std::vector<Point> nodes;
};

/// Dense kappa on the coarse Omega nodes: column j is kappa(phi_j) sampled at
/// the coarse nodes. Throws Error when there are more than `budget` nodes.
KappaMatrix assemble_kappa(const LinearizedOperator& op, const Grid& coarse, int budget = 1200);

/// Dense single-rotation operator delta -> chi_j Lambda(u_j delta) on the
/// coarse basis, rows scaled by sqrt(dt ds) so that singular values are
/// discrete L^2 operator norms.
Eigen::MatrixXd assemble_rotation_operator(const LinearizedOperator& op, int j, const Grid& coarse,
                                           int budget = 1200);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

/// v_i(x) = average over the direction fan of (chi_i(exit+) + chi_i(exit-)) / 2,
/// one field per rotation, zero outside Omega.
std::vector<ScalarField> visibility_factors(const ForwardModel& model, int n_dirs = 32);

struct SymbolWeight {
  ScalarField w;
  /// Minimum of w over Omega.
  double beta = 0.0;
};

/// w(x) = sum_i v_i(x) u_i(x): the direction-averaged principal symbol.
SymbolWeight symbol_weight(const std::vector<ScalarField>& factors, const std::vector<DiffusionSolution>& fields,
                           const DomainMask& mask);
SymbolWeight symbol_weight(const ForwardModel& model, const std::vector<DiffusionSolution>& fields, int n_dirs = 32);

struct ReconstructionOptions {
  int max_iterations = 50;
  double step = 0.9;
  /// Stop when the relative data residual drops below this.
  double tol = 1e-4;
  double floor_fraction = 0.05;
  int divergence_window = 5;
  int n_dirs = 32;
  /// Called after every iteration with (k, relative residual).
  std::function<void(int, double)> progress;
};

struct IterationRecord {
  int k = 0;
  double residual = 0.0;
  /// Distances to the ground truth (NaN when unknown).
  double l2_error = 0.0;
  double h1_error = 0.0;
};

struct ReconstructionState {
  AbsorptionMap sigma;
  std::vector<BoundaryTrace> residuals;
  ScalarField back_projected;
  std::vector<IterationRecord> history;
  int iterations = 0;
  bool converged = false;
  /// Set when the divergence detector stopped the iteration; `message`
  /// carries the residual history.
  bool diverged = false;
  std::string message;
};

/// Relative L^2(Omega) distance ||a - b|| / ||b||.
double relative_l2_error(const ScalarField& a, const ScalarField& b, const DomainMask& mask);

/// Preconditioned fixed point
///   sigma_{k+1} = P+[sigma_k + step * A(sum_i r_i) / max(w, floor)],
/// r_i = data_i - chi_i Lambda(sigma_k u_i[sigma_k]). Stops with `diverged`
/// set when the residual grows for `divergence_window` consecutive steps.
ReconstructionState reconstruct(const ForwardModel& model, const std::vector<BoundaryTrace>& data,
                                const AbsorptionMap& sigma0, const ReconstructionOptions& options = {},
                                const AbsorptionMap* truth = nullptr);

struct PairResult {
  double sigma_difference = 0.0;  // ||sigma - sigma~||_{H^1_0}
  double data_difference = 0.0;   // sum_i ||chi_i Lambda*_i(sigma) - chi_i Lambda*_i(sigma~)||_{H^1}
  double ratio = 0.0;
  double smallness = 0.0;  // C_Omega ||sigma~||_{W^{1,inf}}
  bool excluded = false;   // both differences vanish
  bool zero_data = false;  // nonzero sigma difference with zero data difference
};

struct StabilityReport {
  std::vector<PairResult> pairs;
  int tested = 0;
  double c_star = 0.0;
  double max_smallness = 0.0;
  double poincare = 0.0;
  bool injectivity_violated = false;
};

/// Both sides of the stability estimate for each (sigma, sigma~) pair.
StabilityReport stability_experiment(const ForwardModel& model,
                                     const std::vector<std::pair<AbsorptionMap, AbsorptionMap>>& pairs);

/// ||sum chi_i Lambda(sigma~ delta_u_i)||_{H^1} / ||sum chi_i Lambda(u_i delta)||_{H^1}.
double domination_factor(const LinearizedOperator& op, const ScalarField& delta);

}  // namespace rotopat
