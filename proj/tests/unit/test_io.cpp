#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <random>

#include "rotopat/errors.hpp"
#include "rotopat/io.hpp"

using namespace rotopat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("rotopat_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("raw binary round trip and header layout") {
    TempDir t;
    io::write_binary(t.file("a.bin"), {3, 2, 0.125}, {1, 2, 3, 4, 5, 6});
    const std::string bytes = slurp(t.file("a.bin"));
    REQUIRE(bytes.size() == 32 + 6 * 8);
    CHECK(bytes.substr(0, 8) == "ROTOPAT1");
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);
    CHECK(static_cast<unsigned char>(bytes[16]) == 2);
    const io::RawArray r = io::read_binary(t.file("a.bin"));
    CHECK(r.header.dim0 == 3);
    CHECK(r.header.dim1 == 2);
    CHECK(r.header.scalar == 0.125);
    CHECK(r.values == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(io::write_binary(t.file("b.bin"), {3, 3, 0}, {1, 2}), Error);
  }

  TEST_CASE("corrupt files are rejected") {
    TempDir t;
    io::write_binary(t.file("a.bin"), {2, 2, 1.0}, {1, 2, 3, 4});
    std::string bytes = slurp(t.file("a.bin"));
    {
      std::ofstream o(t.file("short.bin"), std::ios::binary);
      o << bytes.substr(0, bytes.size() - 4);
    }
    CHECK_THROWS_AS(io::read_binary(t.file("short.bin")), Error);
    bytes[0] = 'X';
    {
      std::ofstream o(t.file("magic.bin"), std::ios::binary);
      o << bytes;
    }
    CHECK_THROWS_AS(io::read_binary(t.file("magic.bin")), Error);
    CHECK_THROWS_AS(io::read_binary(t.file("missing.bin")), Error);
  }

  TEST_CASE("grid files") {
    TempDir t;
    const Grid g = Grid::with_cells(20);
    const ScalarField f = ScalarField::from_function(g, [](Point p) { return p.x - 2 * p.y; });
    io::write_grid(t.file("f.grid"), f);
    const ScalarField back = io::read_grid(t.file("f.grid"), g);
    CHECK(std::ranges::equal(back.values(), f.values()));
    CHECK_THROWS_AS(io::read_grid(t.file("f.grid"), Grid::with_cells(22)), Error);
    CHECK_THROWS_AS(io::read_grid(t.file("f.grid"), Grid::with_cells(20, 1.0, 0.3)), Error);
  }

  TEST_CASE("trace files") {
    TempDir t;
    BoundaryTrace d({5, 0.01}, 3);
    for (int n = 0; n < 5; ++n)
      for (int k = 0; k < 3; ++k) d(n, k) = n * 10 + k + 0.5;
    io::write_trace(t.file("d.bin"), d);
    const BoundaryTrace back = io::read_trace(t.file("d.bin"));
    CHECK(back.same_shape(d));
    CHECK(back.raw() == d.raw());
    CHECK(back.time().dt == 0.01);

    io::write_trace_csv(t.file("d.csv"), d);
    std::ifstream in(t.file("d.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,angle_index,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == d.samples() * 3);
  }

  TEST_CASE("matrix files") {
    TempDir t;
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    io::write_matrix(t.file("m.bin"), m);
    CHECK(io::read_matrix(t.file("m.bin")) == m);
    const io::RawArray r = io::read_binary(t.file("m.bin"));
    CHECK(r.values[1] == 2.0);
  }

  TEST_CASE("pgm header and scaling") {
    TempDir t;
    const Grid g = Grid::with_cells(16);
    const ScalarField f = ScalarField::from_function(g, [](Point p) { return p.y; });
    io::write_pgm(t.file("f.pgm"), f);
    const std::string bytes = slurp(t.file("f.pgm"));
    const std::string header = "P5\n17 17\n255\n";
    REQUIRE(bytes.substr(0, header.size()) == header);
    REQUIRE(bytes.size() == header.size() + 289);
    // y up: the first row written is the top of the grid.
    CHECK(static_cast<unsigned char>(bytes[header.size()]) == 255);
    CHECK(static_cast<unsigned char>(bytes.back()) == 0);
  }

  TEST_CASE("directories") {
    TempDir t;
    io::ensure_directory(t.file("a/b/c"));
    CHECK(fs::is_directory(t.file("a/b/c")));
    io::write_text(t.file("a/b/c/x.txt"), "hello\n");
    CHECK(slurp(t.file("a/b/c/x.txt")) == "hello\n");
  }
}
