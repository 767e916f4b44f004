#pragma once

#include <stdexcept>
#include <string>

namespace rotopat {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometric precondition failed (containment, arc widths, tapers).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap or diverged.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// The explicit wave scheme would be unstable with the requested step.
class CflError : public Error {
 public:
  CflError(const std::string& what, double required_dt)
      : Error(what), required_dt_(required_dt) {}

  double required_dt() const { return required_dt_; }

 private:
  double required_dt_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rotopat
