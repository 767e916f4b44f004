#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rotopat/geometry.hpp"
#include "rotopat/grid.hpp"

namespace rotopat {

/// Arm directions of the 5-point stencil.
enum Direction : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };

/// A stencil arm that crosses the disk boundary before reaching the next node.
struct BoundaryArm {
  int unknown;      ///< row owning the arm
  int direction;    ///< Direction of the arm
  double theta;     ///< crossing distance as a fraction of h, in (0, 1]
  Point crossing;   ///< crossing point on the circle
  double angle;     ///< polar angle of the crossing about the disk centre
};

/// Unknown numbering and cut-cell geometry of a disk on a Grid.
///
/// Unknowns are the nodes strictly inside the disk, numbered row-major. An arm
/// from an unknown towards a node outside the disk stops at the circle after
/// theta * h; the ghost value across the circle is extrapolated linearly from
/// the boundary value, which keeps the discrete Laplacian symmetric.
class DiskStencil {
 public:
  DiskStencil(const Grid& grid, Disk disk);

  const Grid& grid() const { return grid_; }
  const Disk& disk() const { return disk_; }
  int unknowns() const { return static_cast<int>(nodes_.size()); }
  std::size_t node(int u) const { return nodes_[static_cast<std::size_t>(u)]; }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  /// Unknown index of a grid node, or -1 outside the disk.
  int unknown_of(std::size_t node) const { return unknown_of_[node]; }
  /// Neighbour unknown per direction, or -1 when the arm is cut.
  const std::array<int, 4>& neighbors(int u) const { return neighbors_[static_cast<std::size_t>(u)]; }
  /// Arm length fraction per direction (1 for uncut arms).
  const std::array<double, 4>& arms(int u) const { return arms_[static_cast<std::size_t>(u)]; }
  const std::vector<BoundaryArm>& boundary_arms() const { return boundary_arms_; }
  /// Sum over arms of 1/theta: the diagonal of h^2 * (-Laplacian).
  double laplacian_diagonal(int u) const { return diagonal_[static_cast<std::size_t>(u)]; }

  /// Gathers the unknowns of a full-grid field.
  std::vector<double> gather(std::span<const double> field) const;
  /// Writes unknowns into a full-grid field (other nodes untouched).
  void scatter(std::span<const double> unknowns, std::span<double> field) const;

  /// Flattened neighbour table (4 per unknown) for kernels.
  const std::vector<std::int32_t>& neighbor_table() const { return neighbor_table_; }
  const std::vector<double>& diagonal() const { return diagonal_; }

 private:
  Grid grid_;
  Disk disk_;
  std::vector<std::size_t> nodes_;
  std::vector<int> unknown_of_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::array<double, 4>> arms_;
  std::vector<BoundaryArm> boundary_arms_;
  std::vector<double> diagonal_;
  std::vector<std::int32_t> neighbor_table_;
};

}  // namespace rotopat
