#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rotopat/config.hpp"

namespace rotopat {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitSelfTest = 4 };

struct RunOptions {
  /// Overrides experiment.output / experiment.seed when set.
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  /// 0 keeps the OpenMP default.
  int threads = 0;
  /// Echoed into the manifest.
  std::string command;
  /// Progress and error lines; null silences them.
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::string output_dir;
};

/// Validates the configuration, runs its mode and writes the artifacts and
/// manifest.ini into the output directory. Errors become exit codes rather
/// than exceptions: 2 configuration or geometry, 3 solver failure or
/// divergence, 4 failed self-test.
RunResult run(ExperimentConfig config, const RunOptions& options = {});

}  // namespace rotopat
