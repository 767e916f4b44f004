#include "rotopat/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "rotopat/errors.hpp"

namespace rotopat::io {

namespace {

constexpr char kMagic[8] = {'R', 'O', 'T', 'O', 'P', 'A', 'T', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

void put(std::ofstream& out, std::uint64_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint64_t get(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return to_le(v);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_binary(const std::string& path, const BinaryHeader& h, const std::vector<double>& values) {
  if (h.dim0 < 0 || h.dim1 < 0 || static_cast<std::size_t>(h.dim0 * h.dim1) != values.size())
    throw Error("binary payload does not match its dimensions");
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, 8);
  put(out, static_cast<std::uint64_t>(h.dim0));
  put(out, static_cast<std::uint64_t>(h.dim1));
  put(out, std::bit_cast<std::uint64_t>(h.scalar));
  for (double v : values) put(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("write failed for '" + path + "'");
}

RawArray read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw Error("'" + path + "' is not a ROTOPAT1 file");
  RawArray a;
  a.header.dim0 = static_cast<std::int64_t>(get(in));
  a.header.dim1 = static_cast<std::int64_t>(get(in));
  a.header.scalar = std::bit_cast<double>(get(in));
  if (!in || a.header.dim0 < 0 || a.header.dim1 < 0 || a.header.dim0 > (1 << 24) || a.header.dim1 > (1 << 24))
    throw Error("'" + path + "' has a corrupt header");
  const auto n = static_cast<std::size_t>(a.header.dim0 * a.header.dim1);
  a.values.resize(n);
  for (auto& v : a.values) v = std::bit_cast<double>(get(in));
  if (!in) throw Error("'" + path + "' is truncated");
  return a;
}

void write_grid(const std::string& path, const ScalarField& f) {
  const Grid& g = f.grid();
  write_binary(path, {g.side(), g.side(), g.spacing()}, f.raw());
}

ScalarField read_grid(const std::string& path, const Grid& grid) {
  RawArray a = read_binary(path);
  if (a.header.dim0 != grid.side() || a.header.dim1 != grid.side() ||
      std::abs(a.header.scalar - grid.spacing()) > 1e-12 * grid.spacing())
    throw Error("'" + path + "' does not match the configured grid");
  return ScalarField(grid, std::move(a.values));
}

void write_trace(const std::string& path, const BoundaryTrace& d) {
  write_binary(path, {d.samples(), d.points(), d.dt()}, d.raw());
}

BoundaryTrace read_trace(const std::string& path) {
  RawArray a = read_binary(path);
  if (a.header.dim0 < 1) throw Error("'" + path + "' has no time samples");
  BoundaryTrace d({static_cast<int>(a.header.dim0 - 1), a.header.scalar}, static_cast<int>(a.header.dim1));
  d.raw() = std::move(a.values);
  return d;
}

void write_trace_csv(const std::string& path, const BoundaryTrace& d) {
  auto out = open_out(path);
  out << "time,angle_index,value\n" << std::setprecision(17);
  for (int n = 0; n < d.samples(); ++n)
    for (int k = 0; k < d.points(); ++k) out << d.time().time(n) << ',' << k << ',' << d(n, k) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  write_binary(path, {m.rows(), m.cols(), 0.0}, v);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  const RawArray a = read_binary(path);
  Eigen::MatrixXd m(a.header.dim0, a.header.dim1);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a.values[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

void write_pgm(const std::string& path, const ScalarField& f) {
  const Grid& g = f.grid();
  const auto [lo_it, hi_it] = std::minmax_element(f.raw().begin(), f.raw().end());
  const double lo = *lo_it, hi = *hi_it;
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << g.side() << ' ' << g.side() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(g.side()));
  for (int j = g.side() - 1; j >= 0; --j) {
    for (int i = 0; i < g.side(); ++i) row[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround((f(i, j) - lo) * scale));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace rotopat::io
