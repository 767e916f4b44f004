#include "rotopat/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rotopat/errors.hpp"
#include "rotopat/kernels.hpp"

namespace rotopat {

namespace {

// Cut arms shorter than this fraction of h would make the explicit scheme
// unstable; the owning node is interpolated from the boundary instead.
constexpr double kMinDynamicArm = 0.5;

double sponge_width(const Grid& grid) { return std::max(grid.margin(), 8.0 * grid.spacing()); }

// Radius where the sponge starts. A disturbance created there by a source in
// B_r reaches the circle no earlier than 2 r_s - r - rho; two extra cells
// cover the stencil reach of the last steps.
double sponge_start(const Grid& grid, double T, const WaveOptions& o) {
  const double rho = grid.rho();
  const double r_src = o.source_radius > 0.0 ? std::min(o.source_radius, rho) : rho;
  return std::max(rho, 0.5 * (T + r_src + rho) + 2.0 * grid.spacing());
}

int wave_padding(const Grid& grid, double T, const WaveOptions& o) {
  const double need = sponge_start(grid, T, o) + sponge_width(grid) + grid.spacing();
  return std::max(0, static_cast<int>(std::ceil((need - grid.half_width()) / grid.spacing())));
}

}  // namespace

SoundSpeedMap::SoundSpeedMap(ScalarField field, Profile profile, bool constant)
    : field_(std::move(field)),
      profile_(std::move(profile)),
      constant_(constant),
      c0_(0.0),
      max_(0.0),
      grad_x_(field_.grid()),
      grad_y_(field_.grid()) {
  c0_ = *std::min_element(field_.raw().begin(), field_.raw().end());
  max_ = *std::max_element(field_.raw().begin(), field_.raw().end());
  if (!(c0_ > 0.0) || !field_.all_finite()) throw std::invalid_argument("sound speed must be finite and positive");
  const Grid& g = field_.grid();
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (!(norm(g.node(k)) <= g.rho()) && std::abs(field_[k] - 1.0) > 1e-12)
      throw std::invalid_argument("sound speed must equal 1 outside the closed ball");
  if (!constant_ && !profile_) {
    const double inv2h = 0.5 / g.spacing();
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i) {
        auto c2 = [&](int a, int b) {
          a = std::clamp(a, 0, g.cells());
          b = std::clamp(b, 0, g.cells());
          return field_(a, b) * field_(a, b);
        };
        grad_x_(i, j) = (c2(i + 1, j) - c2(i - 1, j)) * inv2h;
        grad_y_(i, j) = (c2(i, j + 1) - c2(i, j - 1)) * inv2h;
      }
  }
}

SoundSpeedMap SoundSpeedMap::constant(const Grid& grid, double c) {
  if (c != 1.0) {
    // c = 1 outside the ball is part of the model; a different constant is
    // only meaningful inside it.
    Profile p = [c](Point) { return c; };
    return from_profile(grid, p);
  }
  return SoundSpeedMap(ScalarField(grid, 1.0), nullptr, true);
}

SoundSpeedMap SoundSpeedMap::from_profile(const Grid& grid, Profile profile) {
  const double rho = grid.rho();
  auto f = ScalarField::from_function(grid, [&](Point p) { return norm(p) <= rho ? profile(p) : 1.0; });
  return SoundSpeedMap(std::move(f), std::move(profile), false);
}

SoundSpeedMap SoundSpeedMap::from_field(ScalarField c) { return SoundSpeedMap(std::move(c), nullptr, false); }

void SoundSpeedMap::c2_and_gradient(Point p, double& c2, Point& grad) const {
  if (constant_) {
    c2 = max_ * max_;
    grad = {0.0, 0.0};
    return;
  }
  if (profile_) {
    constexpr double d = 1e-5;
    const double c = profile_(p);
    c2 = c * c;
    auto sq = [&](Point q) {
      const double v = profile_(q);
      return v * v;
    };
    grad.x = (sq({p.x + d, p.y}) - sq({p.x - d, p.y})) / (2 * d);
    grad.y = (sq({p.x, p.y + d}) - sq({p.x, p.y - d})) / (2 * d);
    return;
  }
  const auto s = bilinear_stencil(field_.grid(), p);
  const double c = s.apply(field_.values());
  c2 = c * c;
  grad = {s.apply(grad_x_.values()), s.apply(grad_y_.values())};
}

TimeAxis wave_time_axis(const Grid& grid, double c_max, double T, const WaveOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("propagation time must be positive");
  const double dt_max = 0.5 * grid.spacing() / c_max;
  if (options.cfl > 0.5 + 1e-12 || !(options.cfl > 0.0)) {
    std::ostringstream os;
    os << "CFL factor " << options.cfl << " exceeds 0.5; need dt <= " << dt_max;
    throw CflError(os.str(), dt_max);
  }
  double dt = options.cfl * grid.spacing() / c_max;
  if (options.dt > 0.0) {
    if (options.dt > dt_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "time step " << options.dt << " violates the CFL bound; need dt <= " << dt_max;
      throw CflError(os.str(), dt_max);
    }
    dt = options.dt;
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  return {steps, T / steps};
}

WaveSolver::WaveSolver(const Grid& grid, SoundSpeedMap c, BoundaryParametrization boundary, double T,
                       WaveOptions options)
    : grid_(grid),
      c_(std::move(c)),
      boundary_(boundary),
      T_(T),
      options_(options),
      time_(wave_time_axis(grid, c_.max(), T, options)),
      wave_grid_(grid.padded(wave_padding(grid, T, options))),
      pad_(wave_padding(grid, T, options)),
      damping_(wave_grid_),
      laplace_(grid, DiffusionOptions{1e-11, 0}) {
  if (!(c_.grid() == grid)) throw std::invalid_argument("sound speed lives on a different grid");
  if (std::abs(boundary_.rho() - grid.rho()) > 1e-14) throw std::invalid_argument("boundary radius differs from rho");

  const double h = grid.spacing();
  const double dt = time_.dt;
  const double start = sponge_start(grid, T, options_);
  const double width = sponge_width(grid);
  const double peak = options_.sponge_strength / width;
  const std::size_t nodes = wave_grid_.node_count();
  wave_c_.assign(nodes, 1.0);
  for (int j = 0; j < grid.side(); ++j)
    for (int i = 0; i < grid.side(); ++i)
      wave_c_[wave_grid_.index(i + pad_, j + pad_)] = c_.field()(i, j);
  coef_a_.resize(nodes);
  coef_b_.resize(nodes);
  coef_c_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double r = norm(wave_grid_.node(k));
    double zeta = 0.0;
    if (r > start) {
      const double s = std::min(1.0, (r - start) / width);
      zeta = peak * s * s;
    }
    damping_[k] = zeta;
    const double ck = wave_c_[k];
    const double zd = zeta * dt;
    coef_a_[k] = (2.0 - zd * zd) / (1.0 + zd);
    coef_b_[k] = (1.0 - zd) / (1.0 + zd);
    coef_c_[k] = ck * ck * dt * dt / (h * h) / (1.0 + zd);
  }
  probes_.reserve(static_cast<std::size_t>(boundary_.size()));
  for (int k = 0; k < boundary_.size(); ++k) probes_.push_back(bilinear_stencil(wave_grid_, boundary_.point(k)));

  const DiskStencil& ball = laplace_.stencil();
  const int n = ball.unknowns();
  ball_c_.resize(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const double ck = c_.field()[ball.node(u)];
    ball_c_[static_cast<std::size_t>(u)] = ck * ck * dt * dt / (h * h);
  }

  // Nodes with a very short cut arm become algebraic: linear interpolation
  // between the crossing point and the node on the opposite side.
  slaved_.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> shortest(static_cast<std::size_t>(n), -1);
  const auto& arms = ball.boundary_arms();
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const auto& arm = arms[static_cast<std::size_t>(a)];
    if (arm.theta >= kMinDynamicArm) continue;
    auto& best = shortest[static_cast<std::size_t>(arm.unknown)];
    if (best < 0 || arm.theta < arms[static_cast<std::size_t>(best)].theta) best = a;
    slaved_[static_cast<std::size_t>(arm.unknown)] = 1;
  }
  constexpr int kOpposite[4] = {kWest, kEast, kSouth, kNorth};
  for (int u = 0; u < n; ++u) {
    const int a = shortest[static_cast<std::size_t>(u)];
    if (a < 0) continue;
    const auto& arm = arms[static_cast<std::size_t>(a)];
    int partner = ball.neighbors(u)[static_cast<std::size_t>(kOpposite[arm.direction])];
    if (partner >= 0 && slaved_[static_cast<std::size_t>(partner)]) partner = -1;
    slaves_.push_back({u, partner, a, arm.theta / (1.0 + arm.theta)});
  }

  arm_probes_.reserve(arms.size());
  const double step = boundary_.angle_step();
  for (const auto& arm : arms) {
    const double pos = arm.angle / step;
    const int k0 = static_cast<int>(std::floor(pos));
    arm_probes_.push_back({k0 % boundary_.size(), (k0 + 1) % boundary_.size(), pos - k0});
  }
}

double WaveSolver::staggered_energy(std::span<const double> v0, std::span<const double> v1) const {
  const Grid& g = wave_grid_;
  if (v0.size() != g.node_count() || v1.size() != g.node_count())
    throw std::invalid_argument("energy levels must live on the wave grid");
  const int s = g.side();
  const double h2 = g.spacing() * g.spacing();
  const double dt = time_.dt;
  double kinetic = 0.0;
  double potential = 0.0;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      const std::size_t q = g.index(i, j);
      const double c = wave_c_[q];
      const double vt = (v1[q] - v0[q]) / dt;
      kinetic += vt * vt / (c * c);
      if (i + 1 < s) potential += (v1[q + 1] - v1[q]) * (v0[q + 1] - v0[q]);
      if (j + 1 < s) {
        const std::size_t up = q + static_cast<std::size_t>(s);
        potential += (v1[up] - v1[q]) * (v0[up] - v0[q]);
      }
    }
  return kinetic * h2 + potential;
}

BoundaryTrace WaveSolver::run_forward(const ScalarField& H, Propagation* full) const {
  if (!(H.grid() == grid_)) throw std::invalid_argument("initial pressure lives on a different grid");
  const Grid& wg = wave_grid_;
  const std::size_t nodes = wg.node_count();
  const int s = wg.side();
  const kernels::GridWaveCoefficients coeffs{s, coef_a_, coef_b_, coef_c_};

  BoundaryTrace trace(time_, boundary_.size());
  std::vector<double> prev(nodes, 0.0);
  for (int j = 0; j < grid_.side(); ++j)
    for (int i = 0; i < grid_.side(); ++i) prev[wg.index(i + pad_, j + pad_)] = H(i, j);
  std::vector<double> cur(nodes, 0.0);
  std::vector<double> next(nodes, 0.0);

  auto record = [&](int n, const std::vector<double>& v) {
    auto row = trace.row(n);
    for (std::size_t k = 0; k < probes_.size(); ++k) row[k] = probes_[k].apply(v);
  };
  record(0, prev);

  // Zero initial velocity: v^1 = v^0 + dt^2/2 c^2 Lap v^0 (edges held at zero).
  for (int j = 1; j + 1 < s; ++j)
    for (int i = 1; i + 1 < s; ++i) {
      const std::size_t q = wg.index(i, j);
      const double lap = prev[q - 1] + prev[q + 1] + prev[q - static_cast<std::size_t>(s)] +
                         prev[q + static_cast<std::size_t>(s)] - 4.0 * prev[q];
      cur[q] = prev[q] + 0.5 * coef_c_[q] * (1.0 + damping_[q] * time_.dt) * lap;
    }
  record(1, cur);
  if (full && options_.record_energy) full->energy.push_back(staggered_energy(prev, cur));

  for (int n = 1; n < time_.steps; ++n) {
    kernels::omp::grid_wave_step(coeffs, prev, cur, next);
    std::swap(prev, cur);
    std::swap(cur, next);
    record(n + 1, cur);
    if (full && options_.record_energy) full->energy.push_back(staggered_energy(prev, cur));
  }

  if (full) {
    kernels::omp::grid_wave_step(coeffs, prev, cur, next);
    ScalarField p(grid_);
    ScalarField vel(grid_);
    for (int j = 0; j < grid_.side(); ++j)
      for (int i = 0; i < grid_.side(); ++i) {
        const std::size_t q = wg.index(i + pad_, j + pad_);
        p(i, j) = cur[q];
        vel(i, j) = (next[q] - prev[q]) / (2.0 * time_.dt);
      }
    full->final_pressure = std::move(p);
    full->final_velocity = std::move(vel);
  }
  return trace;
}

Propagation WaveSolver::propagate(const ScalarField& initial_pressure) const {
  Propagation out{BoundaryTrace{}, ScalarField(grid_), ScalarField(grid_), {}};
  out.trace = run_forward(initial_pressure, &out);
  return out;
}

BoundaryTrace WaveSolver::record(const ScalarField& initial_pressure) const {
  return run_forward(initial_pressure, nullptr);
}

void WaveSolver::boundary_values(const BoundaryTrace& h, int n, std::vector<double>& arm_values) const {
  const auto row = h.row(n);
  for (std::size_t a = 0; a < arm_probes_.size(); ++a) {
    const auto& p = arm_probes_[a];
    arm_values[a] = (1.0 - p.t) * row[static_cast<std::size_t>(p.k0)] + p.t * row[static_cast<std::size_t>(p.k1)];
  }
}

ScalarField WaveSolver::back_propagate(const BoundaryTrace& h) const {
  if (h.points() != boundary_.size()) throw std::invalid_argument("trace has a different boundary sampling");
  if (h.time().end() < T_ * (1.0 - 1e-9) || h.steps() < time_.steps) {
    std::ostringstream os;
    os << "trace ends at t = " << h.time().end() << " and has no sample at T = " << T_;
    throw Error(os.str());
  }
  if (std::abs(h.dt() - time_.dt) > 1e-12 * time_.dt) {
    if (h.dt() > 0.5 * grid_.spacing() / c_.max() * (1.0 + 1e-12))
      throw CflError("trace time step violates the CFL bound", 0.5 * grid_.spacing() / c_.max());
    throw std::invalid_argument("trace time step differs from the solver time step");
  }

  const DiskStencil& ball = laplace_.stencil();
  const auto n_unknowns = static_cast<std::size_t>(ball.unknowns());
  const auto& arms = ball.boundary_arms();
  const int N = time_.steps;

  std::vector<double> arm_values(arms.size());
  std::vector<double> bnd(n_unknowns);
  auto load_boundary = [&](int n) {
    boundary_values(h, n, arm_values);
    std::fill(bnd.begin(), bnd.end(), 0.0);
    for (std::size_t a = 0; a < arms.size(); ++a)
      bnd[static_cast<std::size_t>(arms[a].unknown)] += arm_values[a] / arms[a].theta;
  };
  auto apply_slaves = [&](std::vector<double>& v) {
    for (const auto& s : slaves_) {
      const double b = arm_values[static_cast<std::size_t>(s.arm)];
      v[static_cast<std::size_t>(s.unknown)] =
          s.partner >= 0 ? b + s.weight * (v[static_cast<std::size_t>(s.partner)] - b) : b;
    }
  };

  const auto row = h.row(N);
  const BoundaryFunction terminal(boundary_, std::vector<double>(row.begin(), row.end()));
  const ScalarField phi = laplace_.harmonic_extension(terminal);

  const kernels::DiskOperator op{ball.neighbor_table(), ball.diagonal()};
  std::vector<double> later = ball.gather(phi.values());   // v^{n+1}
  std::vector<double> cur(n_unknowns);                      // v^n
  std::vector<double> earlier(n_unknowns);                  // v^{n-1}

  // Zero terminal velocity: v^{N-1} = v^N + dt^2/2 c^2 Lap v^N.
  load_boundary(N);
  kernels::omp::disk_wave_step(op, ball_c_, bnd, later, later, cur);
  for (std::size_t u = 0; u < n_unknowns; ++u) cur[u] = 0.5 * (cur[u] + later[u]);
  boundary_values(h, N - 1, arm_values);
  apply_slaves(cur);

  for (int n = N - 1; n >= 1; --n) {
    load_boundary(n);
    kernels::omp::disk_wave_step(op, ball_c_, bnd, later, cur, earlier);
    boundary_values(h, n - 1, arm_values);
    apply_slaves(earlier);
    std::swap(later, cur);
    std::swap(cur, earlier);
  }

  ScalarField out(grid_);
  ball.scatter(cur, out.values());
  return out;
}

Propagation propagate(const ScalarField& initial_pressure, const SoundSpeedMap& c, double T,
                      const WaveOptions& options) {
  const Grid& g = initial_pressure.grid();
  WaveSolver solver(g, c, BoundaryParametrization::for_grid(g), T, options);
  return solver.propagate(initial_pressure);
}

BoundaryTrace measure(const BoundaryTrace& trace, const BoundaryTrace& chi) {
  if (!trace.same_shape(chi)) throw std::invalid_argument("trace and cutoff shapes differ");
  BoundaryTrace out = trace;
  auto& v = out.raw();
  const auto& w = chi.raw();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= w[k];
  return out;
}

ScalarField back_propagate(const BoundaryTrace& h, const SoundSpeedMap& c, double T, const WaveOptions& options) {
  WaveOptions o = options;
  o.dt = h.dt();
  const Grid& g = c.grid();
  WaveSolver solver(g, c, BoundaryParametrization(h.points(), g.rho()), T, o);
  return solver.back_propagate(h);
}

}  // namespace rotopat
