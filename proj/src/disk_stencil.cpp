#include "rotopat/disk_stencil.hpp"

#include <algorithm>

namespace rotopat {

namespace {

constexpr int kDi[4] = {1, -1, 0, 0};
constexpr int kDj[4] = {0, 0, 1, -1};

// Fraction t in (0, 1] along p -> p + d at which |x - c| = r, for p inside.
double crossing_fraction(Point p, Point d, Disk disk) {
  const Point q = p - disk.center;
  const double a = dot(d, d);
  const double b = dot(q, d);
  const double c = dot(q, q) - disk.radius * disk.radius;
  const double t = (-b + std::sqrt(std::max(0.0, b * b - a * c))) / a;
  // Nodes within 1e-3 h of the circle are clamped; the geometric change is
  // far below discretization error and keeps 1/theta bounded.
  return std::clamp(t, 1e-3, 1.0);
}

}  // namespace

DiskStencil::DiskStencil(const Grid& grid, Disk disk) : grid_(grid), disk_(disk) {
  unknown_of_.assign(grid.node_count(), -1);
  for (int j = 0; j < grid.side(); ++j)
    for (int i = 0; i < grid.side(); ++i) {
      const std::size_t k = grid.index(i, j);
      if (disk.contains(grid.node(i, j))) {
        unknown_of_[k] = static_cast<int>(nodes_.size());
        nodes_.push_back(k);
      }
    }

  const double h = grid.spacing();
  neighbors_.resize(nodes_.size());
  arms_.resize(nodes_.size());
  diagonal_.resize(nodes_.size());
  neighbor_table_.resize(4 * nodes_.size());
  for (int u = 0; u < unknowns(); ++u) {
    const std::size_t k = nodes_[static_cast<std::size_t>(u)];
    const int i = static_cast<int>(k % static_cast<std::size_t>(grid.side()));
    const int j = static_cast<int>(k / static_cast<std::size_t>(grid.side()));
    const Point p = grid.node(i, j);
    double diag = 0.0;
    for (int d = 0; d < 4; ++d) {
      const int ni = i + kDi[d];
      const int nj = j + kDj[d];
      int nb = -1;
      if (ni >= 0 && nj >= 0 && ni < grid.side() && nj < grid.side()) nb = unknown_of_[grid.index(ni, nj)];
      double theta = 1.0;
      if (nb < 0) {
        const Point step{kDi[d] * h, kDj[d] * h};
        theta = crossing_fraction(p, step, disk);
        const Point x = p + theta * step;
        boundary_arms_.push_back({u, d, theta, x, polar_angle(x - disk.center)});
      }
      neighbors_[static_cast<std::size_t>(u)][static_cast<std::size_t>(d)] = nb;
      arms_[static_cast<std::size_t>(u)][static_cast<std::size_t>(d)] = theta;
      neighbor_table_[4 * static_cast<std::size_t>(u) + static_cast<std::size_t>(d)] = nb;
      diag += 1.0 / theta;
    }
    diagonal_[static_cast<std::size_t>(u)] = diag;
  }
}

std::vector<double> DiskStencil::gather(std::span<const double> field) const {
  std::vector<double> out(nodes_.size());
  for (std::size_t u = 0; u < nodes_.size(); ++u) out[u] = field[nodes_[u]];
  return out;
}

void DiskStencil::scatter(std::span<const double> unknowns, std::span<double> field) const {
  for (std::size_t u = 0; u < nodes_.size(); ++u) field[nodes_[u]] = unknowns[u];
}

}  // namespace rotopat
