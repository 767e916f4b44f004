#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rotopat {

/// Uniform time axis t_n = n * dt, n = 0..steps.
struct TimeAxis {
  int steps = 0;
  double dt = 0.0;

  int samples() const { return steps + 1; }
  double end() const { return steps * dt; }
  double time(int n) const { return n * dt; }
  friend bool operator==(const TimeAxis&, const TimeAxis&) = default;
};

/// Time-sampled values on the discretized circle, stored row-major as
/// [time sample][boundary point].
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(TimeAxis time, int n_boundary, double value = 0.0);

  const TimeAxis& time() const { return time_; }
  int steps() const { return time_.steps; }
  double dt() const { return time_.dt; }
  int samples() const { return time_.samples(); }
  int points() const { return n_boundary_; }

  double& operator()(int n, int k) { return values_[index(n, k)]; }
  double operator()(int n, int k) const { return values_[index(n, k)]; }

  std::span<double> row(int n) {
    return {values_.data() + index(n, 0), static_cast<std::size_t>(n_boundary_)};
  }
  std::span<const double> row(int n) const {
    return {values_.data() + index(n, 0), static_cast<std::size_t>(n_boundary_)};
  }

  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  bool same_shape(const BoundaryTrace& other) const {
    return time_ == other.time_ && n_boundary_ == other.n_boundary_;
  }
  bool all_finite() const;
  double max_abs() const;

  BoundaryTrace& operator+=(const BoundaryTrace& other);
  BoundaryTrace& operator-=(const BoundaryTrace& other);
  BoundaryTrace& operator*=(double s);
  friend BoundaryTrace operator+(BoundaryTrace a, const BoundaryTrace& b) { return a += b; }
  friend BoundaryTrace operator-(BoundaryTrace a, const BoundaryTrace& b) { return a -= b; }

 private:
  std::size_t index(int n, int k) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_boundary_) +
           static_cast<std::size_t>(k);
  }

  TimeAxis time_{};
  int n_boundary_ = 0;
  std::vector<double> values_;
};

/// Plain L2 norm of a trace with trapezoid weights in time and arc step `ds`.
double l2_norm(const BoundaryTrace& trace, double ds);

}  // namespace rotopat
