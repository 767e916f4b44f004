#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rotopat/grid.hpp"
#include "rotopat/trace.hpp"

namespace rotopat::io {

/// Every binary file starts with 32 bytes: "ROTOPAT1", two int64 dimensions
/// and one float64, all little-endian, followed by float64 payload.
struct BinaryHeader {
  std::int64_t dim0 = 0;
  std::int64_t dim1 = 0;
  double scalar = 0.0;
};

struct RawArray {
  BinaryHeader header;
  std::vector<double> values;
};

void write_binary(const std::string& path, const BinaryHeader& header, const std::vector<double>& values);
/// Throws Error on a bad magic or a truncated payload.
RawArray read_binary(const std::string& path);

/// Grid files: dims (side, side) and the spacing; rows are j = const.
void write_grid(const std::string& path, const ScalarField& f);
/// Reads a grid file into `grid`, checking dims and spacing.
ScalarField read_grid(const std::string& path, const Grid& grid);

/// Trace binaries: dims (samples, points) and dt.
void write_trace(const std::string& path, const BoundaryTrace& d);
BoundaryTrace read_trace(const std::string& path);
/// Long format: time,angle_index,value.
void write_trace_csv(const std::string& path, const BoundaryTrace& d);

/// Matrix binaries: dims (rows, cols), scalar 0, row-major payload.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

/// 8-bit binary PGM scaled from min to max, y pointing up.
void write_pgm(const std::string& path, const ScalarField& f);

void write_text(const std::string& path, const std::string& text);
void ensure_directory(const std::string& path);

}  // namespace rotopat::io
