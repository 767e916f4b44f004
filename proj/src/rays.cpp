#include "rotopat/rays.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rotopat {

namespace {

struct State {
  Point x;
  Point p;
};

State derivative(const SoundSpeedMap& c, const State& s) {
  double c2 = 0.0;
  Point g{};
  c.c2_and_gradient(s.x, c2, g);
  const double p2 = dot(s.p, s.p);
  return {{c2 * s.p.x, c2 * s.p.y}, {-0.5 * p2 * g.x, -0.5 * p2 * g.y}};
}

State axpy(const State& s, double a, const State& d) {
  return {{s.x.x + a * d.x.x, s.x.y + a * d.x.y}, {s.p.x + a * d.p.x, s.p.y + a * d.p.y}};
}

State rk4(const SoundSpeedMap& c, const State& s, double dt) {
  const State k1 = derivative(c, s);
  const State k2 = derivative(c, axpy(s, 0.5 * dt, k1));
  const State k3 = derivative(c, axpy(s, 0.5 * dt, k2));
  const State k4 = derivative(c, axpy(s, dt, k3));
  const double w = dt / 6.0;
  return {{s.x.x + w * (k1.x.x + 2 * k2.x.x + 2 * k3.x.x + k4.x.x),
           s.x.y + w * (k1.x.y + 2 * k2.x.y + 2 * k3.x.y + k4.x.y)},
          {s.p.x + w * (k1.p.x + 2 * k2.p.x + 2 * k3.p.x + k4.p.x),
           s.p.y + w * (k1.p.y + 2 * k2.p.y + 2 * k3.p.y + k4.p.y)}};
}

struct HalfRay {
  double tau = 0.0;
  Point exit{};
  bool trapped = false;
};

HalfRay trace_half(Point x, Point dir, const SoundSpeedMap& c, const RayOptions& o, std::vector<Point>* path) {
  const double rho = c.grid().rho();
  const double dt = o.step_factor * c.grid().spacing() / c.max();
  const double cap = 10.0 * rho / c.c0();
  double c2 = 0.0;
  Point g{};
  c.c2_and_gradient(x, c2, g);
  const double scale = 1.0 / std::sqrt(c2);
  State s{x, {dir.x * scale, dir.y * scale}};
  double t = 0.0;
  if (path) path->push_back(x);
  while (t < cap) {
    const State next = rk4(c, s, dt);
    if (norm(next.x) > rho) {
      double lo = 0.0;
      double hi = dt;
      while (hi - lo > o.exit_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (norm(rk4(c, s, mid).x) > rho) hi = mid;
        else lo = mid;
      }
      const double tau = 0.5 * (lo + hi);
      const Point y = rk4(c, s, tau).x;
      if (path) path->push_back(y);
      return {t + tau, y, false};
    }
    s = next;
    t += dt;
    if (path) path->push_back(s.x);
  }
  return {t, s.x, true};
}

}  // namespace

Ray trace_ray(Point x, Point xi, const SoundSpeedMap& c, const RayOptions& options) {
  if (norm(x) > c.grid().rho() * (1.0 + 1e-12)) throw std::invalid_argument("ray start lies outside the ball");
  const double len = norm(xi);
  if (std::abs(len - 1.0) > 1e-9) throw std::invalid_argument("ray direction must be a unit vector");
  if (!(options.step_factor > 0.0) || !(options.exit_tolerance > 0.0))
    throw std::invalid_argument("ray step and tolerance must be positive");

  Ray ray;
  ray.start = x;
  ray.direction = xi;
  std::vector<Point> back;
  const HalfRay minus = trace_half(x, {-xi.x, -xi.y}, c, options, options.record_path ? &back : nullptr);
  const HalfRay plus = trace_half(x, xi, c, options, options.record_path ? &ray.path : nullptr);
  if (options.record_path) {
    // back runs start -> minus exit; path runs start -> plus exit.
    std::reverse(back.begin(), back.end());
    back.pop_back();
    back.insert(back.end(), ray.path.begin(), ray.path.end());
    ray.path = std::move(back);
  }
  ray.tau_plus = plus.tau;
  ray.tau_minus = minus.tau;
  ray.exit_plus = plus.exit;
  ray.exit_minus = minus.exit;
  ray.trapped = plus.trapped || minus.trapped;
  return ray;
}

std::vector<bool> check_uniqueness(const AcquisitionSetup& setup, const DomainMask& mask, const SoundSpeedMap& c,
                                   int fan) {
  const Grid& grid = mask.grid();
  const auto param = BoundaryParametrization::for_grid(grid);
  const auto& nodes = mask.omega_nodes();
  const int m = setup.rotation_count();
  std::vector<bool> out(static_cast<std::size_t>(m), false);
  if (nodes.empty()) {
    out.assign(out.size(), true);
    return out;
  }

  // Shared fan of rays per node for variable c: first arrival at each exit.
  std::vector<std::vector<std::pair<double, double>>> arrivals;  // (exit angle, time)
  if (!c.is_constant()) {
    if (fan < 8) throw std::invalid_argument("uniqueness fan needs at least 8 rays");
    arrivals.resize(nodes.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(nodes.size()); ++q) {
      const Point x = grid.node(nodes[static_cast<std::size_t>(q)]);
      auto& list = arrivals[static_cast<std::size_t>(q)];
      for (int k = 0; k < fan; ++k) {
        const double a = kTwoPi * k / fan;
        const HalfRay r = trace_half(x, {std::cos(a), std::sin(a)}, c, {}, nullptr);
        if (!r.trapped) list.emplace_back(polar_angle(r.exit), r.tau);
      }
    }
  }

  for (int j = 0; j < m; ++j) {
    const Arc arc = setup.arc(j);
    std::vector<Point> ys;
    std::vector<double> ss;
    auto add = [&](double a) {
      ys.push_back({param.rho() * std::cos(a), param.rho() * std::sin(a)});
      ss.push_back(setup.duration(a));
    };
    for (int k = 0; k < param.size(); ++k)
      if (arc.contains(param.angle(k))) add(param.angle(k));
    if (!arc.full()) {
      add(arc.center - arc.half_width);
      add(arc.center + arc.half_width);
    }

    bool all = true;
    for (std::size_t q = 0; q < nodes.size() && all; ++q) {
      bool witness = false;
      if (c.is_constant()) {
        const Point x = grid.node(nodes[q]);
        for (std::size_t y = 0; y < ys.size() && !witness; ++y) witness = norm(x - ys[y]) / c.max() < ss[y];
      } else {
        for (const auto& [a, t] : arrivals[q])
          if (arc.contains(a) && t < setup.duration(a)) {
            witness = true;
            break;
          }
      }
      all = witness;
    }
    out[static_cast<std::size_t>(j)] = all;
  }
  return out;
}

bool ray_visible(const Ray& ray, const std::vector<Cutoff>& cutoffs) {
  if (ray.trapped) return false;
  const double ap = polar_angle(ray.exit_plus);
  const double am = polar_angle(ray.exit_minus);
  for (const auto& chi : cutoffs)
    if (chi.on_plateau(ap, ray.tau_plus) || chi.on_plateau(am, ray.tau_minus)) return true;
  return false;
}

VisibilityReport check_stability(const AcquisitionSetup& setup, const DomainMask& mask, const SoundSpeedMap& c,
                                 int n_dirs) {
  if (n_dirs < 8) throw std::invalid_argument("visibility check needs at least 8 directions");
  const Grid& grid = mask.grid();
  std::vector<Cutoff> cutoffs;
  for (int i = 0; i < setup.rotation_count(); ++i) cutoffs.push_back(setup.cutoff(i));

  const auto& nodes = mask.omega_nodes();
  std::vector<std::vector<UncoveredSample>> missed(nodes.size());
  std::vector<int> covered(nodes.size(), 0);
  std::vector<int> trapped(nodes.size(), 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(nodes.size()); ++q) {
    const auto uq = static_cast<std::size_t>(q);
    const Point x = grid.node(nodes[uq]);
    for (int k = 0; k < n_dirs; ++k) {
      const double a = kTwoPi * k / n_dirs;
      const Point xi{std::cos(a), std::sin(a)};
      const Ray r = trace_ray(x, xi, c);
      if (r.trapped) ++trapped[uq];
      if (ray_visible(r, cutoffs)) ++covered[uq];
      else missed[uq].push_back({x, xi});
    }
  }

  VisibilityReport rep(grid);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    hits += static_cast<std::size_t>(covered[q]);
    rep.trapped += static_cast<std::size_t>(trapped[q]);
    rep.coverage[nodes[q]] = static_cast<double>(covered[q]) / n_dirs;
    rep.uncovered_samples.insert(rep.uncovered_samples.end(), missed[q].begin(), missed[q].end());
  }
  rep.samples = nodes.size() * static_cast<std::size_t>(n_dirs);
  rep.coverage_fraction = rep.samples ? static_cast<double>(hits) / static_cast<double>(rep.samples) : 1.0;
  rep.stability_ok = rep.uncovered_samples.empty();
  rep.uniqueness_ok = check_uniqueness(setup, mask, c);
  rep.overlapping_rotations = overlapping_rotations(setup);
  return rep;
}

}  // namespace rotopat
