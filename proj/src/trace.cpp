#include "rotopat/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rotopat {

BoundaryTrace::BoundaryTrace(TimeAxis time, int n_boundary, double value)
    : time_(time), n_boundary_(n_boundary) {
  if (time.steps < 1 || !(time.dt > 0.0)) throw std::invalid_argument("trace needs dt > 0 and at least one step");
  if (n_boundary < 1) throw std::invalid_argument("trace needs boundary points");
  values_.assign(static_cast<std::size_t>(time.samples()) * static_cast<std::size_t>(n_boundary), value);
}

bool BoundaryTrace::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double BoundaryTrace::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

BoundaryTrace& BoundaryTrace::operator+=(const BoundaryTrace& other) {
  if (!same_shape(other)) throw std::invalid_argument("trace shapes differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator-=(const BoundaryTrace& other) {
  if (!same_shape(other)) throw std::invalid_argument("trace shapes differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double l2_norm(const BoundaryTrace& trace, double ds) {
  double total = 0.0;
  for (int n = 0; n < trace.samples(); ++n) {
    const double w = (n == 0 || n == trace.steps()) ? 0.5 : 1.0;
    double row = 0.0;
    for (double v : trace.row(n)) row += v * v;
    total += w * row;
  }
  return std::sqrt(total * trace.dt() * ds);
}

}  // namespace rotopat
