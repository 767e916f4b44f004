#pragma once

#include <optional>
#include <vector>

#include "rotopat/acoustics.hpp"
#include "rotopat/geometry.hpp"

namespace rotopat {

/// One geodesic of the metric c^-2 g through a point, traced both ways until
/// it leaves the closed ball. Times are travel times.
struct Ray {
  Point start{};
  Point direction{};
  /// Sampled points from the minus exit through `start` to the plus exit
  /// (only filled when requested).
  std::vector<Point> path;
  double tau_plus = 0.0;
  double tau_minus = 0.0;
  Point exit_plus{};
  Point exit_minus{};
  /// No exit before the time cap in at least one direction.
  bool trapped = false;
};

struct RayOptions {
  /// RK4 step as a fraction of h / max c.
  double step_factor = 0.5;
  double exit_tolerance = 1e-8;
  bool record_path = false;
};

/// Integrates x' = c^2 xi, xi' = -|xi|^2 grad(c^2) / 2 with classical RK4 from
/// (x, xi / c(x)), so that c |xi| = 1 and the parameter is travel time. Exits
/// are located by bisection on the crossing step. The time cap is 10 rho / c0.
Ray trace_ray(Point x, Point xi, const SoundSpeedMap& c, const RayOptions& options = {});

/// Per-rotation verdict of: every Omega node has a boundary point y in
/// Gamma_j with dist(x, y) < s(y). Euclidean distance for c = 1, otherwise
/// the first arrival over a fan of `fan` traced rays.
std::vector<bool> check_uniqueness(const AcquisitionSetup& setup, const DomainMask& mask, const SoundSpeedMap& c,
                                   int fan = 256);

struct UncoveredSample {
  Point x{};
  Point xi{};
};

struct VisibilityReport {
  explicit VisibilityReport(const Grid& grid) : coverage(grid) {}

  std::vector<bool> uniqueness_ok;
  bool stability_ok = false;
  std::vector<UncoveredSample> uncovered_samples;
  double coverage_fraction = 0.0;
  std::size_t samples = 0;
  std::size_t trapped = 0;
  /// Fraction of covered directions at each Omega node (0 elsewhere).
  ScalarField coverage;
  /// Rotations whose illumination support meets their own arc.
  std::vector<int> overlapping_rotations;
};

/// True when the + or - exit of the ray (x, xi) lands on the plateau of some
/// cutoff: y in a shrunken arc Gamma'_i and exit time below s(y) - taper.
bool ray_visible(const Ray& ray, const std::vector<Cutoff>& cutoffs);

/// Samples every Omega node and n_dirs equispaced directions (n_dirs >= 8)
/// and reports the visibility condition. Also fills uniqueness_ok.
VisibilityReport check_stability(const AcquisitionSetup& setup, const DomainMask& mask, const SoundSpeedMap& c,
                                 int n_dirs = 32);

}  // namespace rotopat
