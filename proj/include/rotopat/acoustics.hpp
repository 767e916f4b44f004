#pragma once

#include <functional>
#include <vector>

#include "rotopat/disk_stencil.hpp"
#include "rotopat/geometry.hpp"
#include "rotopat/grid.hpp"
#include "rotopat/optics.hpp"
#include "rotopat/trace.hpp"

namespace rotopat {

/// Sound speed c >= c0 > 0 with c = 1 outside the closed ball.
class SoundSpeedMap {
 public:
  using Profile = std::function<double(Point)>;

  static SoundSpeedMap constant(const Grid& grid, double c = 1.0);
  /// Samples `profile` inside the closed ball and sets c = 1 outside it.
  /// Rays evaluate the profile itself rather than its samples.
  static SoundSpeedMap from_profile(const Grid& grid, Profile profile);
  /// Nodal samples only; rays interpolate c^2 and its gradient bilinearly.
  static SoundSpeedMap from_field(ScalarField c);

  const ScalarField& field() const { return field_; }
  const Grid& grid() const { return field_.grid(); }
  double c0() const { return c0_; }
  double max() const { return max_; }
  bool is_constant() const { return constant_; }

  /// c^2 and grad(c^2) at an arbitrary point.
  void c2_and_gradient(Point p, double& c2, Point& grad) const;

 private:
  SoundSpeedMap(ScalarField field, Profile profile, bool constant);

  ScalarField field_;
  Profile profile_;
  bool constant_;
  double c0_;
  double max_;
  ScalarField grad_x_;
  ScalarField grad_y_;
};

struct WaveOptions {
  /// dt = cfl * h / max c (rounded down so that steps * dt = T).
  double cfl = 0.5;
  /// Explicit step; 0 derives it from `cfl`.
  double dt = 0.0;
  /// Peak damping rate of the sponge times its width.
  double sponge_strength = 12.0;
  /// Radius of a disk containing the support of every initial pressure that
  /// will be propagated; 0 means rho. Smaller values shrink the padding.
  double source_radius = 0.0;
  bool record_energy = false;
};

struct Propagation {
  BoundaryTrace trace;
  ScalarField final_pressure;
  ScalarField final_velocity;
  /// Leapfrog energy at half steps n + 1/2 (when requested).
  std::vector<double> energy;
};

/// Time step for a grid, sound speed and duration. Throws CflError when the
/// requested step violates dt <= 0.5 h / max c.
TimeAxis wave_time_axis(const Grid& grid, double c_max, double T, const WaveOptions& options = {});

/// Forward acoustic propagation and the time-reversal operator A on one grid.
///
/// Forward: leapfrog in time and a five-point Laplacian on a padded copy of
/// the grid. The padding puts the quadratic damping ramp far enough out that
/// nothing it does can reach the circle before T (it starts at radius
/// (T + source_radius + rho) / 2), so the recorded trace is the free-space
/// one up to discretization error. The pressure is recorded at every step on
/// the boundary points by bilinear probes.
///
/// Backward: the same scheme restricted to B_rho with the boundary trace
/// imposed on the circle through cut-cell arms, starting from the harmonic
/// extension of h(T) with zero velocity.
class WaveSolver {
 public:
  WaveSolver(const Grid& grid, SoundSpeedMap c, BoundaryParametrization boundary, double T,
             WaveOptions options = {});

  const Grid& grid() const { return grid_; }
  const SoundSpeedMap& sound_speed() const { return c_; }
  const BoundaryParametrization& boundary() const { return boundary_; }
  const TimeAxis& time() const { return time_; }
  double total_time() const { return T_; }
  /// Grid of the forward simulation (the solver grid padded on every side).
  const Grid& wave_grid() const { return wave_grid_; }
  int padding() const { return pad_; }
  /// Sponge damping rate on wave_grid().
  const ScalarField& damping() const { return damping_; }

  Propagation propagate(const ScalarField& initial_pressure) const;
  /// Boundary trace of the forward problem only.
  BoundaryTrace record(const ScalarField& initial_pressure) const;
  ScalarField back_propagate(const BoundaryTrace& h) const;

  /// Staggered leapfrog energy sum((v1 - v0)^2 / (c dt)^2) h^2 + sum_edges dv1 dv0
  /// for two consecutive levels on wave_grid().
  double staggered_energy(std::span<const double> v0, std::span<const double> v1) const;

 private:
  struct Slave {
    int unknown;
    int partner;  // unknown on the far side of the short arm, or -1
    int arm;      // index into ball_.boundary_arms()
    double weight;  // partner weight theta / (1 + theta)
  };
  struct AngularProbe {
    int k0;
    int k1;
    double t;
  };

  BoundaryTrace run_forward(const ScalarField& H, Propagation* full) const;
  void boundary_values(const BoundaryTrace& h, int n, std::vector<double>& arm_values) const;

  Grid grid_;
  SoundSpeedMap c_;
  BoundaryParametrization boundary_;
  double T_;
  WaveOptions options_;
  TimeAxis time_;

  Grid wave_grid_;
  int pad_;
  std::vector<double> wave_c_;
  ScalarField damping_;
  std::vector<double> coef_a_, coef_b_, coef_c_;
  std::vector<BilinearStencil> probes_;

  DiffusionSolver laplace_;
  std::vector<double> ball_c_;
  std::vector<char> slaved_;
  std::vector<Slave> slaves_;
  std::vector<AngularProbe> arm_probes_;
};

Propagation propagate(const ScalarField& initial_pressure, const SoundSpeedMap& c, double T,
                      const WaveOptions& options = {});

/// Pointwise product with a cutoff weight.
BoundaryTrace measure(const BoundaryTrace& trace, const BoundaryTrace& chi);

ScalarField back_propagate(const BoundaryTrace& h, const SoundSpeedMap& c, double T,
                           const WaveOptions& options = {});

}  // namespace rotopat
