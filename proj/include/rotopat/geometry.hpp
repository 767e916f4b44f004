#pragma once

#include <functional>
#include <vector>

#include "rotopat/grid.hpp"
#include "rotopat/trace.hpp"

namespace rotopat {

struct Disk {
  Point center{};
  double radius = 0.0;

  bool contains(Point p) const { return norm(p - center) < radius; }
};

/// Node flags for the ball B_rho and the support region Omega.
///
/// Omega is a disk compactly contained in B_rho with at least two cells of
/// clearance; the disk itself is kept so that solvers can place the exact
/// boundary between nodes.
class DomainMask {
 public:
  const Grid& grid() const { return grid_; }
  const Disk& omega() const { return omega_; }

  bool in_ball(std::size_t k) const { return inside_ball_[k] != 0; }
  bool in_omega(std::size_t k) const { return inside_omega_[k] != 0; }
  std::span<const unsigned char> ball_flags() const { return inside_ball_; }
  std::span<const unsigned char> omega_flags() const { return inside_omega_; }
  const std::vector<std::size_t>& omega_nodes() const { return omega_nodes_; }
  std::size_t omega_count() const { return omega_nodes_.size(); }

 private:
  friend DomainMask build_mask(const Grid&, double, Point);
  DomainMask(const Grid& grid) : grid_(grid) {}

  Grid grid_;
  Disk omega_{};
  std::vector<unsigned char> inside_ball_;
  std::vector<unsigned char> inside_omega_;
  std::vector<std::size_t> omega_nodes_;
};

/// Flags nodes of B_rho and of the disk Omega = B(omega_center, omega_radius).
/// Throws GeometryError when Omega comes within 2h of the circle.
DomainMask build_mask(const Grid& grid, double omega_radius, Point omega_center = {});

/// Equispaced sampling of the circle of radius rho.
class BoundaryParametrization {
 public:
  BoundaryParametrization(int n_points, double rho);
  /// Roughly one point per grid spacing, rounded up to a multiple of 8.
  static BoundaryParametrization for_grid(const Grid& grid);

  int size() const { return n_; }
  double rho() const { return rho_; }
  double angle(int k) const { return kTwoPi * k / n_; }
  double angle_step() const { return kTwoPi / n_; }
  double arc_length_step() const { return kTwoPi * rho_ / n_; }
  Point point(int k) const;

  friend bool operator==(const BoundaryParametrization&, const BoundaryParametrization&) = default;

 private:
  int n_;
  double rho_;
};

/// A function on the circle given by its values at the parametrization angles.
class BoundaryFunction {
 public:
  BoundaryFunction(BoundaryParametrization param, std::vector<double> values);
  template <class F>
  static BoundaryFunction from_function(BoundaryParametrization param, F&& f) {
    std::vector<double> v(static_cast<std::size_t>(param.size()));
    for (int k = 0; k < param.size(); ++k) v[static_cast<std::size_t>(k)] = f(param.angle(k));
    return BoundaryFunction(param, std::move(v));
  }

  const BoundaryParametrization& param() const { return param_; }
  const std::vector<double>& values() const { return values_; }
  /// Periodic linear interpolation at an arbitrary angle.
  double at(double angle) const;

 private:
  BoundaryParametrization param_;
  std::vector<double> values_;
};

/// output(alpha) = f(alpha + theta), periodic linear interpolation.
BoundaryFunction rotate_boundary_function(const BoundaryFunction& f, double theta);

/// Closed angular interval [center - half_width, center + half_width] on the
/// circle; half_width >= pi means the full circle.
struct Arc {
  double center = 0.0;
  double half_width = 0.0;

  bool full() const { return half_width >= kPi; }
  bool contains(double angle) const;
  Arc rotated(double theta) const { return {wrap_angle(center + theta), half_width}; }
};

/// C^1 cosine taper: 1 for x <= edge - width, 0 for x >= edge.
double cosine_taper(double x, double edge, double width);

enum class IlluminationShape { bump, uniform };

/// Base illumination g on the circle.
struct Illumination {
  IlluminationShape shape = IlluminationShape::bump;
  double center = 0.0;
  double half_width = kPi / 8;
  double amplitude = 1.0;

  double operator()(double angle) const;
  Arc support() const;
};

class Cutoff;

/// Illumination, transducer arc, rotation set and recording schedule.
struct AcquisitionSetup {
  Illumination illumination{};
  Arc transducer{kPi, kPi / 6};
  std::vector<double> rotations;
  /// Recording duration s(angle) on the measured arcs.
  std::function<double(double)> duration;
  double total_time = 2.4;
  double angle_taper = kPi / 36;
  double time_taper = 0.1;

  /// Defaults scaled to a ball of radius rho and minimal sound speed c0:
  /// m equispaced rotations, s = 2.2 rho / c0, T = 2.4 rho / c0.
  static AcquisitionSetup defaults(int m = 8, double rho = 1.0, double c0 = 1.0);
  static std::vector<double> equispaced_rotations(int m);

  int rotation_count() const { return static_cast<int>(rotations.size()); }
  /// Gamma_i = R_i(Gamma).
  Arc arc(int i) const { return transducer.rotated(rotations.at(static_cast<std::size_t>(i))); }
  /// g_i(x) = g(R_i x) sampled on `param`.
  BoundaryFunction illumination_for(int i, const BoundaryParametrization& param) const;
  Cutoff cutoff(int i) const;
  /// Support of g_i, which is the base support moved by -theta_i.
  Arc illumination_support(int i) const;
  double max_duration() const;

  /// Throws GeometryError on any violated invariant.
  void validate() const;
};

/// Rotation indices whose illumination support intersects their own arc.
std::vector<int> overlapping_rotations(const AcquisitionSetup& setup);

/// Space-time weight chi_i supported on the arc Gamma_i and t < s(y).
class Cutoff {
 public:
  Cutoff(Arc arc, std::function<double(double)> duration, double angle_taper, double time_taper);

  const Arc& arc() const { return arc_; }
  double angle_factor(double angle) const;
  double operator()(double angle, double t) const;
  /// True where chi = 1 (the shrunken plateau Gamma'_i x {t < s - taper}).
  bool on_plateau(double angle, double t) const;
  /// chi evaluated on every (time sample, boundary point).
  BoundaryTrace sample(const BoundaryParametrization& param, TimeAxis time) const;

 private:
  Arc arc_;
  std::function<double(double)> duration_;
  double angle_taper_;
  double time_taper_;
};

/// chi_i for rotation i sampled on the boundary x time grid.
BoundaryTrace build_cutoff(const AcquisitionSetup& setup, int i, const BoundaryParametrization& param,
                           TimeAxis time);

}  // namespace rotopat
