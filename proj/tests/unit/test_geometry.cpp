#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rotopat/errors.hpp"
#include "rotopat/geometry.hpp"

using namespace rotopat;

TEST_SUITE("geometry") {
  TEST_CASE("empty omega") {
    const DomainMask m = build_mask(Grid::with_cells(32), 0.0);
    CHECK(m.omega_count() == 0);
  }

  TEST_CASE("omega touching the circle is rejected") {
    const Grid g = Grid::with_cells(64);
    CHECK_THROWS_AS(build_mask(g, 1.0), GeometryError);
    CHECK_THROWS_AS(build_mask(g, 0.5, {0.48, 0.0}), GeometryError);
    CHECK_THROWS_AS(build_mask(g, -0.1), GeometryError);
  }

  TEST_CASE("omega node count against the disk area") {
    const Grid g = Grid::with_spacing(1.0 / 64);
    const double r = 0.4;
    const DomainMask m = build_mask(g, r);
    // Independent lattice enumeration.
    std::size_t count = 0;
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i) {
        const double x = g.origin() + i * g.spacing(), y = g.origin() + j * g.spacing();
        if (x * x + y * y < r * r) ++count;
      }
    CHECK(m.omega_count() == count);
    const double h = g.spacing();
    const double area = oracle::kPi * r * r / (h * h);
    CHECK(std::abs(static_cast<double>(m.omega_count()) - area) <= 4.0 * (2 * oracle::kPi * r / h));
  }

  TEST_CASE("mask invariants and monotonicity") {
    const Grid g = Grid::with_cells(48);
    const double h = g.spacing();
    std::vector<unsigned char> previous(g.node_count(), 0);
    for (double r : {0.1, 0.2, 0.3, 0.5, 0.7}) {
      const DomainMask m = build_mask(g, r, {0.1, -0.05});
      for (std::size_t k = 0; k < g.node_count(); ++k) {
        if (m.in_omega(k)) {
          CHECK(m.in_ball(k));
          CHECK(1.0 - norm(g.node(k)) >= 2 * h);
        }
        if (previous[k]) CHECK(m.in_omega(k));
        previous[k] = m.in_omega(k);
      }
    }
  }

  TEST_CASE("boundary parametrization") {
    const BoundaryParametrization p(96, 1.5);
    CHECK(p.arc_length_step() == doctest::Approx(2 * oracle::kPi * 1.5 / 96));
    CHECK(p.angle(0) == 0.0);
    CHECK(p.angle(95) < 2 * oracle::kPi);
    CHECK(norm(p.point(17)) == doctest::Approx(1.5));
    const auto q = BoundaryParametrization::for_grid(Grid::with_cells(64));
    CHECK(q.size() % 8 == 0);
    CHECK(q.arc_length_step() <= Grid::with_cells(64).spacing() * 1.0001);
  }

  TEST_CASE("rotation of boundary functions") {
    const BoundaryParametrization p(128, 1.0);
    const auto f = BoundaryFunction::from_function(p, [](double a) { return std::cos(a) + 0.3 * std::sin(3 * a); });
    SUBCASE("theta = 0 and 2 pi are the identity") {
      const auto f0 = rotate_boundary_function(f, 0.0);
      const auto f2 = rotate_boundary_function(f, 2 * oracle::kPi);
      for (int k = 0; k < p.size(); ++k) {
        CHECK(f0.values()[k] == f.values()[k]);
        CHECK(std::abs(f2.values()[k] - f.values()[k]) <= 1e-14);
      }
    }
    SUBCASE("support of a taper on [0, pi/4] moves to [-pi/2, -pi/4]") {
      const auto g = BoundaryFunction::from_function(p, [](double a) {
        const double d = std::abs(oracle::wrap(a) - oracle::kPi / 8);
        return a < oracle::kPi ? cosine_taper(d, oracle::kPi / 8, oracle::kPi / 16) : 0.0;
      });
      const auto r = rotate_boundary_function(g, oracle::kPi / 2);
      for (int k = 0; k < p.size(); ++k) {
        const double a = p.angle(k);
        const double expected = g.at(a + oracle::kPi / 2);
        CHECK(r.values()[k] == doctest::Approx(expected).epsilon(1e-12));
        const bool inside = a >= 1.5 * oracle::kPi - 1e-12 && a <= 1.75 * oracle::kPi + 1e-12;
        if (!inside) CHECK(r.values()[k] == 0.0);
      }
    }
    SUBCASE("forward then backward rotation is second order") {
      auto err = [](int n) {
        const BoundaryParametrization q(n, 1.0);
        const auto h = BoundaryFunction::from_function(q, [](double a) { return std::cos(a) + 0.3 * std::sin(3 * a); });
        // Half-cell offset at every resolution, so only h changes.
        const double theta = 3.5 * q.angle_step();
        const auto back = rotate_boundary_function(rotate_boundary_function(h, theta), -theta);
        double e = 0.0;
        for (int k = 0; k < n; ++k) e += std::pow(back.values()[k] - h.values()[k], 2) * q.arc_length_step();
        return std::sqrt(e);
      };
      const double e1 = err(64), e2 = err(128);
      CHECK(e1 < 0.02);
      CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
    }
  }

  TEST_CASE("cosine taper") {
    CHECK(cosine_taper(0.0, 1.0, 0.2) == 1.0);
    CHECK(cosine_taper(1.0, 1.0, 0.2) == 0.0);
    CHECK(cosine_taper(0.9, 1.0, 0.2) == doctest::Approx(0.5).epsilon(1e-12));
    // C^1: one-sided derivatives vanish at both ends.
    const double d = 1e-6;
    CHECK(std::abs(cosine_taper(0.8 + d, 1.0, 0.2) - 1.0) / d < 1e-4);
    CHECK(cosine_taper(1.0 - d, 1.0, 0.2) / d < 1e-4);
  }

  TEST_CASE("cutoff values") {
    AcquisitionSetup s = AcquisitionSetup::defaults(8);
    const Cutoff chi = s.cutoff(1);
    const Arc arc = s.arc(1);
    const double sd = s.duration(arc.center);
    CHECK(chi(wrap_angle(arc.center + arc.half_width + 0.01), 0.5) == 0.0);
    CHECK(chi(arc.center, sd / 2) == 1.0);
    CHECK(chi.on_plateau(arc.center, sd / 2));
    const double edge = arc.half_width - s.angle_taper;
    CHECK(chi(wrap_angle(arc.center + edge + s.angle_taper / 2), sd / 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chi(arc.center, sd - s.time_taper / 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chi(arc.center, sd + 0.01) == 0.0);
  }

  TEST_CASE("sampled cutoff is bounded and vanishes after s") {
    const AcquisitionSetup s = AcquisitionSetup::defaults(4);
    const BoundaryParametrization p(64, 1.0);
    const TimeAxis t{240, 0.01};
    for (int i = 0; i < s.rotation_count(); ++i) {
      const BoundaryTrace chi = build_cutoff(s, i, p, t);
      for (int n = 0; n < chi.samples(); ++n)
        for (int k = 0; k < chi.points(); ++k) {
          CHECK(chi(n, k) >= 0.0);
          CHECK(chi(n, k) <= 1.0);
          if (t.time(n) >= s.duration(p.angle(k))) CHECK(chi(n, k) == 0.0);
          if (!s.arc(i).contains(p.angle(k))) CHECK(chi(n, k) == 0.0);
        }
    }
  }

  TEST_CASE("setup validation") {
    AcquisitionSetup s = AcquisitionSetup::defaults(8);
    CHECK_NOTHROW(s.validate());
    SUBCASE("taper wider than the arc") {
      s.transducer.half_width = s.angle_taper / 2;
      CHECK_THROWS_AS(s.validate(), GeometryError);
      CHECK_THROWS_AS(s.cutoff(0), GeometryError);
    }
    SUBCASE("illumination overlapping the arc") {
      s.illumination.center = s.transducer.center;
      CHECK_THROWS_AS(s.validate(), GeometryError);
    }
    SUBCASE("zero illumination") {
      s.illumination.amplitude = 0.0;
      CHECK_THROWS_AS(s.validate(), GeometryError);
    }
    SUBCASE("T shorter than s") {
      s.total_time = 1.0;
      CHECK_THROWS_AS(s.validate(), GeometryError);
    }
    SUBCASE("no rotations") {
      s.rotations.clear();
      CHECK_THROWS_AS(s.validate(), GeometryError);
    }
    SUBCASE("uniform illumination is exempt from disjointness") {
      s.illumination.shape = IlluminationShape::uniform;
      CHECK_NOTHROW(s.validate());
    }
  }

  TEST_CASE("rotated illumination and arcs") {
    const AcquisitionSetup s = AcquisitionSetup::defaults(8);
    const BoundaryParametrization p(256, 1.0);
    for (int i = 0; i < s.rotation_count(); ++i) {
      const auto gi = s.illumination_for(i, p);
      for (int k = 0; k < p.size(); k += 5)
        CHECK(gi.values()[k] == doctest::Approx(s.illumination(p.angle(k) + s.rotations[i])).epsilon(1e-12));
      CHECK(s.arc(i).center == doctest::Approx(wrap_angle(s.transducer.center + s.rotations[i])));
      CHECK(s.illumination_support(i).center == doctest::Approx(wrap_angle(s.illumination.center - s.rotations[i])));
    }
    // Light at -theta and the arc at pi + theta meet for theta = pi/2 and 3 pi/2.
    CHECK(overlapping_rotations(s) == std::vector<int>{2, 6});
  }

  TEST_CASE("default schedule scales with rho and c0") {
    const AcquisitionSetup s = AcquisitionSetup::defaults(3, 2.0, 0.5);
    CHECK(s.rotation_count() == 3);
    CHECK(s.duration(0.3) == doctest::Approx(2.2 * 2.0 / 0.5));
    CHECK(s.total_time == doctest::Approx(2.4 * 2.0 / 0.5));
    CHECK(s.max_duration() == doctest::Approx(8.8));
  }
}
