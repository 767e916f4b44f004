#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rotopat {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point, Point) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Angle of p in [0, 2pi).
double polar_angle(Point p);

/// Wraps an angle into [0, 2pi).
double wrap_angle(double a);

/// Signed angular difference a - b folded into [-pi, pi).
double angle_difference(double a, double b);

/// Uniform node-centred Cartesian grid on a square centred at the origin.
///
/// Nodes sit at origin + (i, j) * h for 0 <= i, j <= n_cells. The square
/// always strictly contains the closed disk of radius rho + margin, so the
/// ball B_rho is surrounded by an absorbing frame of at least `margin`.
class Grid {
 public:
  /// Grid with `n_cells` cells per side (one spare cell on each side).
  static Grid with_cells(int n_cells, double rho = 1.0, double margin = 0.25);
  /// Grid with spacing `h`; the cell count is rounded up to an even number.
  static Grid with_spacing(double h, double rho = 1.0, double margin = 0.25);

  /// Same spacing and centre with `extra` more cells on every side; node
  /// (i, j) of this grid is node (i + extra, j + extra) of the result.
  Grid padded(int extra) const;

  int cells() const { return n_cells_; }
  int side() const { return n_cells_ + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  }
  double spacing() const { return h_; }
  double origin() const { return origin_; }
  double rho() const { return rho_; }
  double margin() const { return margin_; }
  double half_width() const { return -origin_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(i);
  }
  Point node(int i, int j) const { return {origin_ + i * h_, origin_ + j * h_}; }
  Point node(std::size_t k) const {
    const auto s = static_cast<std::size_t>(side());
    return node(static_cast<int>(k % s), static_cast<int>(k / s));
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(int n_cells, double h, double rho, double margin);

  int n_cells_;
  double h_;
  double origin_;
  double rho_;
  double margin_;
};

/// Nodal samples of a real function on a Grid.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double value = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  /// Samples f(x) at every node.
  template <class F>
  static ScalarField from_function(const Grid& grid, F&& f) {
    ScalarField out(grid);
    for (int j = 0; j < grid.side(); ++j)
      for (int i = 0; i < grid.side(); ++i) out(i, j) = f(grid.node(i, j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  /// Bilinear interpolation; points outside the grid are clamped to it.
  double sample(Point p) const;

  bool all_finite() const;
  double max_abs() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Discrete L2 norm (sum |f|^2 h^2)^(1/2) over all nodes, or over nodes where
/// `selector` is nonzero.
double l2_norm(const ScalarField& f);
double l2_norm(const ScalarField& f, std::span<const unsigned char> selector);

/// Bilinear interpolation stencil: four node indices and weights.
struct BilinearStencil {
  std::size_t nodes[4];
  double weights[4];

  double apply(std::span<const double> values) const {
    return weights[0] * values[nodes[0]] + weights[1] * values[nodes[1]] +
           weights[2] * values[nodes[2]] + weights[3] * values[nodes[3]];
  }
};

BilinearStencil bilinear_stencil(const Grid& grid, Point p);

}  // namespace rotopat
