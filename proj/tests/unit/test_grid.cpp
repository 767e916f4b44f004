#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rotopat/grid.hpp"
#include "rotopat/trace.hpp"

using namespace rotopat;

TEST_SUITE("grid") {
  TEST_CASE("with_cells keeps the ball and margin strictly inside") {
    for (int n : {16, 64, 130}) {
      const Grid g = Grid::with_cells(n, 1.0, 0.25);
      CHECK(g.cells() == n);
      CHECK(g.side() == n + 1);
      CHECK(g.half_width() > 1.25);
      CHECK(g.spacing() == doctest::Approx(2.5 / (n - 2)));
      CHECK(g.node(0, 0).x == doctest::Approx(-g.half_width()));
      CHECK(g.node(n, n).x == doctest::Approx(g.half_width()));
    }
  }

  TEST_CASE("with_spacing rounds the cell count up to an even number") {
    const Grid g = Grid::with_spacing(1.0 / 64, 1.0, 0.25);
    CHECK(g.spacing() == 1.0 / 64);
    CHECK(g.cells() % 2 == 0);
    CHECK(g.half_width() > 1.25);
    // The origin is a node.
    const int mid = g.cells() / 2;
    CHECK(std::abs(g.node(mid, mid).x) < 1e-14);
  }

  TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(Grid::with_cells(15), std::invalid_argument);
    CHECK_THROWS_AS(Grid::with_spacing(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid::with_cells(32, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid::with_cells(32, 1.0, -0.1), std::invalid_argument);
  }

  TEST_CASE("padded grid shares spacing and node positions") {
    const Grid g = Grid::with_cells(32);
    const Grid p = g.padded(5);
    CHECK(p.spacing() == g.spacing());
    CHECK(p.cells() == g.cells() + 10);
    for (int j : {0, 7, 32})
      for (int i : {0, 13, 32}) {
        CHECK(p.node(i + 5, j + 5).x == doctest::Approx(g.node(i, j).x).epsilon(1e-14));
        CHECK(p.node(i + 5, j + 5).y == doctest::Approx(g.node(i, j).y).epsilon(1e-14));
      }
    CHECK_THROWS(g.padded(-1));
  }

  TEST_CASE("node index round trip") {
    const Grid g = Grid::with_cells(20);
    for (std::size_t k = 0; k < g.node_count(); k += 37) {
      const Point p = g.node(k);
      const int i = static_cast<int>(std::lround((p.x - g.origin()) / g.spacing()));
      const int j = static_cast<int>(std::lround((p.y - g.origin()) / g.spacing()));
      CHECK(g.index(i, j) == k);
    }
  }

  TEST_CASE("bilinear sampling is exact on bilinear functions") {
    const Grid g = Grid::with_cells(24);
    auto f = [](Point p) { return 1.0 + 2.0 * p.x - 3.0 * p.y + 0.5 * p.x * p.y; };
    const ScalarField s = ScalarField::from_function(g, f);
    for (Point p : {Point{0.1234, -0.77}, Point{-1.1, 0.3}, Point{0.0, 0.0}, Point{0.999, 0.999}})
      CHECK(s.sample(p) == doctest::Approx(f(p)).epsilon(1e-12));
  }

  TEST_CASE("l2 norm of a constant field and selector") {
    const Grid g = Grid::with_cells(16);
    const ScalarField one(g, 1.0);
    const double h = g.spacing();
    CHECK(l2_norm(one) == doctest::Approx(std::sqrt(static_cast<double>(g.node_count())) * h));
    std::vector<unsigned char> sel(g.node_count(), 0);
    sel[3] = sel[40] = 1;
    CHECK(l2_norm(one, sel) == doctest::Approx(std::sqrt(2.0) * h));
  }

  TEST_CASE("field arithmetic checks grids") {
    const ScalarField a(Grid::with_cells(16), 1.0);
    const ScalarField b(Grid::with_cells(18), 1.0);
    CHECK_THROWS_AS(a + b, std::invalid_argument);
    ScalarField c = a + a;
    c *= 0.25;
    CHECK(c[5] == 0.5);
    CHECK_THROWS_AS(ScalarField(Grid::with_cells(16), std::vector<double>(3)), std::invalid_argument);
  }

  TEST_CASE("finiteness and max_abs") {
    ScalarField f(Grid::with_cells(16));
    CHECK(f.all_finite());
    f[10] = -4.0;
    CHECK(f.max_abs() == 4.0);
    f[11] = std::nan("");
    CHECK_FALSE(f.all_finite());
  }

  TEST_CASE("angle helpers") {
    CHECK(wrap_angle(-0.5) == doctest::Approx(2 * kPi - 0.5));
    CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2 * kPi));
    CHECK(polar_angle({0.0, -1.0}) == doctest::Approx(1.5 * kPi));
    CHECK(angle_difference(0.1, 2 * kPi - 0.1) == doctest::Approx(0.2));
    CHECK(angle_difference(2 * kPi - 0.1, 0.1) == doctest::Approx(-0.2));
    for (double a = -10.0; a < 10.0; a += 0.37) {
      const double w = wrap_angle(a);
      CHECK(w >= 0.0);
      CHECK(w < 2 * kPi);
      const double d = angle_difference(a, 1.0);
      CHECK(d >= -kPi);
      CHECK(d < kPi);
    }
  }

  TEST_CASE("boundary trace shape and arithmetic") {
    BoundaryTrace a({10, 0.1}, 8, 1.0);
    CHECK(a.samples() == 11);
    CHECK(a.time().end() == doctest::Approx(1.0));
    BoundaryTrace b = a + a;
    CHECK(b(3, 4) == 2.0);
    b -= a;
    CHECK(b.max_abs() == 1.0);
    CHECK_THROWS_AS(a + BoundaryTrace({10, 0.1}, 9), std::invalid_argument);
    CHECK_THROWS_AS(BoundaryTrace({0, 0.1}, 8), std::invalid_argument);
    // Trapezoid in time, rectangle on the circle: 1 over [0, 1] x 8 ds.
    CHECK(l2_norm(a, 0.5) == doctest::Approx(std::sqrt(1.0 * 8 * 0.5)));
  }
}
