#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rotopat/acoustics.hpp"
#include "rotopat/geometry.hpp"
#include "rotopat/phantom.hpp"

namespace rotopat {

enum class Mode { simulate, reconstruct, check_geometry, analyze_operator, stability_sweep, self_test };

const char* mode_name(Mode m);
/// Throws ConfigError for unknown names.
Mode parse_mode(const std::string& name);

enum class SoundSpeedKind { constant, gaussian };

struct GeometryConfig {
  double rho = 1.0;
  int cells = 128;
  double margin = 0.25;
  double omega_radius = 0.35;
  Point omega_center{};
};

struct AcquisitionConfig {
  IlluminationShape illumination = IlluminationShape::bump;
  double illumination_center = 0.0;
  double illumination_half_width = kPi / 8;
  double illumination_amplitude = 1.0;
  double transducer_center = kPi;
  double transducer_half_width = kPi / 6;
  int rotations = 8;
  /// Explicit angles; overrides `rotations` when nonempty.
  std::vector<double> rotation_angles;
  /// Constant recording duration s; <= 0 means 2.2 rho / c0.
  double duration = 0.0;
  /// <= 0 means 2.4 rho / c0.
  double total_time = 0.0;
  double angle_taper = kPi / 36;
  double time_taper = 0.1;
};

struct MediumConfig {
  PhantomSpec phantom{{Bump{{0.08, -0.05}, 0.15, 0.5, 0.15}}, {}};
  SoundSpeedKind sound_speed = SoundSpeedKind::constant;
  /// c = 1 + amplitude * exp(-|x - center|^2 / width) inside the ball.
  double c_amplitude = 0.2;
  double c_width = 0.1;
  Point c_center{};
};

struct SolverConfig {
  double diffusion_tol = 1e-10;
  int diffusion_max_iterations = 0;
  double cfl = 0.5;
  double sponge_strength = 12.0;
  int max_iterations = 50;
  double step = 0.9;
  double residual_tol = 1e-4;
  double floor_fraction = 0.05;
  int n_dirs = 32;
};

struct ExperimentBlock {
  Mode mode = Mode::simulate;
  std::uint64_t seed = 1;
  std::string output = "out";
  /// Directory written by simulate; reconstruct simulates its own data when empty.
  std::string data;
  /// Additive Gaussian noise on reconstruct data, relative to max |trace|.
  double noise = 0.0;
  int pairs = 10;
  double pair_amplitude = 0.3;
  int coarse_cells = 24;
  bool write_csv = true;
};

struct ExperimentConfig {
  GeometryConfig geometry;
  AcquisitionConfig acquisition;
  MediumConfig medium;
  SolverConfig solver;
  ExperimentBlock experiment;
};

/// Reads [geometry], [acquisition], [medium], [solver] and [experiment]
/// sections of key = value lines. Missing keys keep their defaults; unknown
/// sections or keys and malformed values raise ConfigError naming the field.
/// A [run] section (written to manifests) is ignored.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Checks every block against the module preconditions (ConfigError).
void validate(const ExperimentConfig& config);

/// INI text that parse_config reads back to the same configuration.
std::string to_ini(const ExperimentConfig& config);

/// Angles accept plain numbers and multiples of pi: "0.5", "pi/6", "2*pi/3",
/// "-pi". Throws ConfigError.
double parse_angle(const std::string& text, const std::string& field);

// Builders from a validated configuration.
Grid build_grid(const ExperimentConfig& config);
AcquisitionSetup build_setup(const ExperimentConfig& config, double c0);
SoundSpeedMap build_sound_speed(const ExperimentConfig& config, const Grid& grid);
WaveOptions build_wave_options(const ExperimentConfig& config);

}  // namespace rotopat
