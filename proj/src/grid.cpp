#include "rotopat/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rotopat {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w -= kTwoPi;
  return w;
}

double polar_angle(Point p) { return wrap_angle(std::atan2(p.y, p.x)); }

double angle_difference(double a, double b) {
  double d = std::fmod(a - b + kPi, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d - kPi;
}

Grid::Grid(int n_cells, double h, double rho, double margin)
    : n_cells_(n_cells), h_(h), origin_(-0.5 * n_cells * h), rho_(rho), margin_(margin) {
  if (n_cells < 16) throw std::invalid_argument("grid needs at least 16 cells per side");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (!(rho > 0.0) || margin < 0.0) throw std::invalid_argument("invalid ball radius or margin");
  if (!(half_width() > rho + margin))
    throw std::invalid_argument("grid square must strictly contain the disk of radius rho + margin");
}

Grid Grid::with_cells(int n_cells, double rho, double margin) {
  if (n_cells < 16) throw std::invalid_argument("grid needs at least 16 cells per side, got " +
                                                std::to_string(n_cells));
  return Grid(n_cells, 2.0 * (rho + margin) / (n_cells - 2), rho, margin);
}

Grid Grid::with_spacing(double h, double rho, double margin) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const int half = static_cast<int>(std::ceil((rho + margin) / h - 1e-9)) + 1;
  return Grid(std::max(16, 2 * half), h, rho, margin);
}

Grid Grid::padded(int extra) const {
  if (extra < 0) throw std::invalid_argument("padding must be nonnegative");
  return Grid(n_cells_ + 2 * extra, h_, rho_, margin_ + extra * h_);
}

ScalarField::ScalarField(const Grid& grid, double value)
    : grid_(grid), values_(grid.node_count(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count())
    throw std::invalid_argument("field size does not match grid node count");
}

BilinearStencil bilinear_stencil(const Grid& grid, Point p) {
  const double h = grid.spacing();
  const int last = grid.cells();
  double fx = std::clamp((p.x - grid.origin()) / h, 0.0, static_cast<double>(last));
  double fy = std::clamp((p.y - grid.origin()) / h, 0.0, static_cast<double>(last));
  int i = std::min(static_cast<int>(fx), last - 1);
  int j = std::min(static_cast<int>(fy), last - 1);
  const double tx = fx - i;
  const double ty = fy - j;
  BilinearStencil s{};
  s.nodes[0] = grid.index(i, j);
  s.nodes[1] = grid.index(i + 1, j);
  s.nodes[2] = grid.index(i, j + 1);
  s.nodes[3] = grid.index(i + 1, j + 1);
  s.weights[0] = (1 - tx) * (1 - ty);
  s.weights[1] = tx * (1 - ty);
  s.weights[2] = (1 - tx) * ty;
  s.weights[3] = tx * ty;
  return s;
}

double ScalarField::sample(Point p) const { return bilinear_stencil(grid_, p).apply(values_); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (!(other.grid_ == grid_)) throw std::invalid_argument("field grids differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (!(other.grid_ == grid_)) throw std::invalid_argument("field grids differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s) * f.grid().spacing();
}

double l2_norm(const ScalarField& f, std::span<const unsigned char> selector) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (selector[k]) s += f[k] * f[k];
  return std::sqrt(s) * f.grid().spacing();
}

}  // namespace rotopat
