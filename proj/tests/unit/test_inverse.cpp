#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "rotopat/errors.hpp"
#include "rotopat/inverse.hpp"
#include "rotopat/rays.hpp"

using namespace rotopat;

namespace {

struct Small {
  Grid grid;
  std::shared_ptr<const DomainMask> mask;
  ForwardModel model;

  explicit Small(AcquisitionSetup setup, int cells = 48)
      : grid(Grid::with_cells(cells)),
        mask(std::make_shared<const DomainMask>(build_mask(grid, 0.35))),
        model(mask, std::move(setup), SoundSpeedMap::constant(grid)) {}
};

ScalarField bump(const std::shared_ptr<const DomainMask>& m, Point c, double r, double a) {
  return generate_phantom({{Bump{c, r, a, r}}, {}}, m, 0.0).sigma.field();
}

double trace_sum_norm(const std::vector<BoundaryTrace>& d, double ds) {
  BoundaryTrace s = d.front();
  for (std::size_t i = 1; i < d.size(); ++i) s += d[i];
  return h1_norm_trace(s, ds);
}

}  // namespace

TEST_SUITE("inverse") {
  TEST_CASE("Poincare constant of disks") {
    const Grid g = Grid::with_spacing(1.0 / 128);
    const DomainMask big = build_mask(g, 0.35), half = build_mask(g, 0.175), shifted = build_mask(g, 0.2, {0.1, 0.05});
    const double cb = poincare_constant(big), ch = poincare_constant(half), cs = poincare_constant(shifted);
    CHECK(std::abs(cb - 0.35 / oracle::kJ01) <= 1e-2 * 0.35 / oracle::kJ01);
    CHECK(std::abs(ch / cb - 0.5) <= 1e-2 * 0.5);
    CHECK(cs <= cb + 1e-6);
    CHECK_THROWS_AS(poincare_constant(build_mask(g, 0.0)), Error);
  }

  TEST_CASE("H1 norm of a field") {
    const Grid g = Grid::with_spacing(1.0 / 128);
    CHECK(h1_norm_field(ScalarField(g)) == 0.0);
    const ScalarField f = ScalarField::from_function(g, [](Point p) {
      const bool in = p.x >= -1e-12 && p.x <= 1.0 + 1e-12 && p.y >= -1e-12 && p.y <= 1.0 + 1e-12;
      return in ? std::sin(oracle::kPi * p.x) * std::sin(oracle::kPi * p.y) : 0.0;
    });
    const double exact = std::sqrt(0.25 + oracle::kPi * oracle::kPi / 2);
    CHECK(std::abs(h1_norm_field(f) - exact) <= 1e-2 * exact);
    CHECK(h1_norm_field(2.0 * f) == doctest::Approx(2.0 * h1_norm_field(f)).epsilon(1e-14));
  }

  TEST_CASE("H1 norm of a trace") {
    const int K = 64;
    const double ds = 2 * oracle::kPi / K, T = 3.0;
    BoundaryTrace d({600, T / 600}, K);
    for (int n = 0; n < d.samples(); ++n)
      for (int k = 0; k < K; ++k) d(n, k) = std::sin(d.time().time(n)) * (1.0 + 0.5 * std::cos(ds * k));
    // int sin^2 = T/2 - sin(2T)/4, int cos^2 = T/2 + sin(2T)/4; angular factors
    // int (1 + cos/2)^2 = 2 pi (1 + 1/8), int (sin/2)^2 = pi / 4.
    const double s2 = T / 2 - std::sin(2 * T) / 4, c2 = T / 2 + std::sin(2 * T) / 4;
    const double exact = std::sqrt(s2 * 2 * oracle::kPi * 1.125 + c2 * 2 * oracle::kPi * 1.125 + s2 * oracle::kPi / 4);
    CHECK(h1_norm_trace(d, ds) == doctest::Approx(exact).epsilon(1e-2));
    CHECK(h1_norm_trace(BoundaryTrace(d.time(), K), ds) == 0.0);
  }

  TEST_CASE("forward model and the linearization") {
    Small s(AcquisitionSetup::defaults(2));
    const auto& model = s.model;
    for (const auto& d : model.data(ScalarField(s.grid))) CHECK(d.max_abs() == 0.0);

    const ScalarField bg = bump(s.mask, {0.0, 0.05}, 0.25, 0.3);
    const ScalarField d1 = bump(s.mask, {0.1, -0.1}, 0.15, 1.0), d2 = bump(s.mask, {-0.1, 0.1}, 0.12, 0.5);
    const LinearizedOperator op(model, bg);

    SUBCASE("kappa is linear") {
      const ScalarField lhs = op.apply(2.0 * d1 + (-0.5) * d2);
      const ScalarField rhs = 2.0 * op.apply(d1) + (-0.5) * op.apply(d2);
      CHECK(l2_norm(lhs - rhs) <= 1e-8 * l2_norm(rhs));
      CHECK(op.apply(ScalarField(s.grid)).max_abs() == 0.0);
      for (std::size_t k = 0; k < s.grid.node_count(); ++k)
        if (!s.mask->in_omega(k)) REQUIRE(op.apply(d1)[k] == 0.0);
    }
    SUBCASE("measurement map is differentiable with quadratic remainder") {
      const auto base = model.data(bg);
      const double ds = model.boundary().arc_length_step();
      auto remainder = [&](double t) {
        const auto pert = model.data(bg + t * d1);
        BoundaryTrace r = op.principal_data(t * d1) + op.higher_order_data(t * d1);
        for (std::size_t i = 0; i < pert.size(); ++i) r -= pert[i] - base[i];
        return h1_norm_trace(r, ds);
      };
      const double r1 = remainder(0.4), r2 = remainder(0.2);
      CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
    }
    SUBCASE("principal data is the sum of the rotation data") {
      BoundaryTrace sum = op.rotation_data(0, d1) + op.rotation_data(1, d1);
      CHECK(sum.raw() == op.principal_data(d1).raw());
    }
  }

  TEST_CASE("assembled kappa matches apply") {
    Small s(AcquisitionSetup::defaults(2));
    const LinearizedOperator op(s.model, ScalarField(s.grid));
    const Grid coarse = Grid::with_cells(16);
    const KappaMatrix km = assemble_kappa(op, coarse);
    const CoarseBasis basis(coarse, *s.mask);
    REQUIRE(km.matrix.rows() == basis.size());
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd v(basis.size());
      for (int j = 0; j < basis.size(); ++j) v[j] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
      const Eigen::VectorXd direct = basis.sample(op.apply(basis.expand(v)));
      CHECK((km.matrix * v - direct).norm() <= 1e-10 * direct.norm());
    }
    CHECK((km.matrix * Eigen::VectorXd::Zero(basis.size())).norm() == 0.0);
    CHECK_THROWS_AS(assemble_kappa(op, coarse, 3), Error);
    const Eigen::VectorXd sv = singular_values(km.matrix);
    for (Eigen::Index k = 1; k < sv.size(); ++k) CHECK(sv[k] <= sv[k - 1]);
    CHECK(sv[sv.size() - 1] > 0.0);
  }

  TEST_CASE("coarse basis interpolates") {
    const Grid fine = Grid::with_cells(48);
    const DomainMask m = build_mask(fine, 0.35);
    const CoarseBasis b(Grid::with_cells(16), m);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(b.size());
    const ScalarField f = b.expand(one);
    const Eigen::VectorXd sampled = b.sample(f);
    for (int j = 0; j < b.size(); ++j) {
      const Point x = b.node(j);
      // Near the edge the hats of dropped coarse nodes are missing.
      if (std::hypot(x.x, x.y) < 0.35 - 2 * b.coarse().spacing()) CHECK(sampled[j] == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (!m.in_omega(k)) CHECK(f[k] == 0.0);
      CHECK(f[k] <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("single-rotation injectivity proxy") {
    const Grid coarse = Grid::with_cells(16);
    AcquisitionSetup good = AcquisitionSetup::defaults(1);
    AcquisitionSetup bad = AcquisitionSetup::defaults(1);
    // Omega sits at least 0.65 from the circle, so s = 0.5 leaves every point unwitnessed.
    bad.duration = [](double) { return 0.5; };
    Small sg(good), sb(bad);
    CHECK(check_uniqueness(good, *sg.mask, SoundSpeedMap::constant(sg.grid))[0]);
    CHECK_FALSE(check_uniqueness(bad, *sb.mask, SoundSpeedMap::constant(sb.grid))[0]);
    const double vg = singular_values(assemble_rotation_operator(LinearizedOperator(sg.model, ScalarField(sg.grid)), 0, coarse)).minCoeff();
    const double vb = singular_values(assemble_rotation_operator(LinearizedOperator(sb.model, ScalarField(sb.grid)), 0, coarse)).minCoeff();
    CHECK(vg > 0.0);
    CHECK(vg > 10.0 * vb);
  }

  TEST_CASE("symbol weight") {
    SUBCASE("full aperture with u = 1") {
      AcquisitionSetup s = AcquisitionSetup::defaults(1);
      s.illumination.shape = IlluminationShape::uniform;
      s.transducer.half_width = oracle::kPi;
      Small sm(s);
      const auto u = sm.model.fields(ScalarField(sm.grid));
      const SymbolWeight w = symbol_weight(sm.model, u, 16);
      for (std::size_t k : sm.mask->omega_nodes()) CHECK(w.w[k] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(w.beta == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("no aperture") {
      Small sm(AcquisitionSetup::defaults(2));
      const auto u = sm.model.fields(ScalarField(sm.grid));
      const std::vector<ScalarField> zero(2, ScalarField(sm.grid));
      const SymbolWeight w = symbol_weight(zero, u, *sm.mask);
      CHECK(w.w.max_abs() == 0.0);
      CHECK(w.beta == 0.0);
    }
    SUBCASE("eight overlapping arcs against exit counting") {
      AcquisitionSetup s = AcquisitionSetup::defaults(8);
      s.illumination.shape = IlluminationShape::uniform;
      s.angle_taper = oracle::kPi / 90;
      Small sm(s);
      const auto u = sm.model.fields(ScalarField(sm.grid));
      const int n_dirs = 32;
      const SymbolWeight w = symbol_weight(sm.model, u, n_dirs);
      for (std::size_t q = 0; q < sm.mask->omega_nodes().size(); q += 7) {
        const std::size_t k = sm.mask->omega_nodes()[q];
        const Point x = sm.grid.node(k);
        double expected = 0.0;
        for (int d = 0; d < n_dirs; ++d) {
          const double a = 2 * oracle::kPi * d / n_dirs;
          const auto [tp, tm] = oracle::line_circle_exits(x.x, x.y, std::cos(a), std::sin(a), 1.0);
          for (double e : {std::atan2(x.y + tp * std::sin(a), x.x + tp * std::cos(a)),
                           std::atan2(x.y - tm * std::sin(a), x.x - tm * std::cos(a))})
            for (int i = 0; i < 8; ++i)
              if (oracle::angular_distance(e, s.arc(i).center) <= s.transducer.half_width) expected += 0.5;
        }
        expected /= n_dirs;
        CHECK(w.w[k] >= 0.9 * expected);
        CHECK(w.w[k] <= 1.1 * expected);
      }
    }
  }

  TEST_CASE("reconstruction") {
    Small s(AcquisitionSetup::defaults(8));
    SUBCASE("zero data converges immediately") {
      const auto data = s.model.data(ScalarField(s.grid));
      const auto st = reconstruct(s.model, data, AbsorptionMap::zero(s.mask));
      CHECK(st.converged);
      CHECK(st.iterations == 0);
      CHECK(st.history.front().residual == 0.0);
    }
    SUBCASE("a bump is recovered") {
      const AbsorptionMap truth(bump(s.mask, {0.08, -0.05}, 0.15, 0.5), s.mask);
      const auto data = s.model.data(truth.field());
      ReconstructionOptions o;
      o.max_iterations = 20;
      const auto st = reconstruct(s.model, data, AbsorptionMap::zero(s.mask), o, &truth);
      CHECK_FALSE(st.diverged);
      CHECK(st.history.back().l2_error < 0.1);
      CHECK(st.history.back().residual < st.history.front().residual);
      for (std::size_t k = 0; k < st.sigma.field().size(); ++k) {
        CHECK(st.sigma.field()[k] >= 0.0);
        if (!s.mask->in_omega(k)) CHECK(st.sigma.field()[k] == 0.0);
      }
      CHECK(relative_l2_error(st.sigma.field(), truth.field(), *s.mask) == doctest::Approx(st.history.back().l2_error));
    }
    SUBCASE("an oversized step is flagged as divergence") {
      const AbsorptionMap truth(bump(s.mask, {0.08, -0.05}, 0.15, 0.5), s.mask);
      const auto data = s.model.data(truth.field());
      ReconstructionOptions o;
      o.step = 60.0;
      o.max_iterations = 40;
      const auto st = reconstruct(s.model, data, AbsorptionMap::zero(s.mask), o, &truth);
      CHECK(st.diverged);
      CHECK(st.message.find("diverged") != std::string::npos);
    }
    SUBCASE("shape errors") {
      std::vector<BoundaryTrace> one(1, s.model.zero_trace());
      CHECK_THROWS_AS(reconstruct(s.model, one, AbsorptionMap::zero(s.mask)), std::invalid_argument);
    }
  }

  TEST_CASE("stability experiment") {
    Small s(AcquisitionSetup::defaults(4));
    const double cp = poincare_constant(*s.mask);
    const AbsorptionMap a(bump(s.mask, {0.05, 0.0}, 0.15, 0.3), s.mask);
    const AbsorptionMap b(bump(s.mask, {-0.05, 0.08}, 0.12, 0.2), s.mask);
    const AbsorptionMap ha(0.5 * a.field(), s.mask), hb(0.5 * b.field(), s.mask);
    const StabilityReport r = stability_experiment(s.model, {{a, a}, {a, b}, {ha, hb}});
    REQUIRE(r.pairs.size() == 3);
    CHECK(r.pairs[0].excluded);
    CHECK(r.tested == 2);
    CHECK(std::isfinite(r.pairs[1].ratio));
    CHECK(r.pairs[1].ratio > 0.0);
    CHECK(r.pairs[2].ratio == doctest::Approx(r.pairs[1].ratio).epsilon(0.3));
    CHECK(r.c_star == doctest::Approx(std::max(r.pairs[1].ratio, r.pairs[2].ratio)));
    CHECK_FALSE(r.injectivity_violated);
    CHECK(r.poincare == doctest::Approx(cp));
    CHECK(r.pairs[1].smallness == doctest::Approx(cp * w1inf_norm(b.field())));
  }

  TEST_CASE("higher-order term is dominated for a small background") {
    Small s(AcquisitionSetup::defaults(4));
    const ScalarField bg = bump(s.mask, {0.0, 0.0}, 0.2, 0.2);
    const LinearizedOperator op(s.model, bg);
    const double ds = s.model.boundary().arc_length_step();
    const ScalarField d = bump(s.mask, {0.1, 0.0}, 0.15, 1.0);
    const double f = domination_factor(op, d);
    CHECK(f <= 0.5);
    CHECK(f == doctest::Approx(h1_norm_trace(op.higher_order_data(d), ds) / h1_norm_trace(op.principal_data(d), ds)));
    CHECK(trace_sum_norm({op.principal_data(d)}, ds) > 0.0);
  }
}
