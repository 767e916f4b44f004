#include "rotopat/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "rotopat/errors.hpp"
#include "rotopat/inverse.hpp"
#include "rotopat/io.hpp"
#include "rotopat/kernels.hpp"
#include "rotopat/rays.hpp"

namespace rotopat {

namespace {

namespace fs = std::filesystem;

struct Context {
  const ExperimentConfig& cfg;
  std::string out;
  std::ostream* log;
  Grid grid;
  std::shared_ptr<const DomainMask> mask;
  SoundSpeedMap c;
  AcquisitionSetup setup;

  std::string path(const std::string& name) const { return (fs::path(out) / name).string(); }

  void say(const std::string& line) const {
    if (log) *log << line << std::endl;
  }

  ForwardModel model() const {
    ForwardModelOptions o;
    o.diffusion.tol = cfg.solver.diffusion_tol;
    o.diffusion.max_iterations = cfg.solver.diffusion_max_iterations;
    o.wave = build_wave_options(cfg);
    return ForwardModel(mask, setup, c, o);
  }
};

std::string rotation_file(const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d.%s", stem, i, ext);
  return buf;
}

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller on our own uniforms keeps the noise identical across standard libraries.
double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

int simulate(const Context& ctx) {
  const Phantom ph = generate_phantom(ctx.cfg.medium.phantom, ctx.mask);
  const ForwardModel model = ctx.model();
  ctx.say("simulate: " + std::to_string(model.rotation_count()) + " rotations, " +
          std::to_string(model.time().samples()) + " samples x " + std::to_string(model.boundary().size()) +
          " points");
  const auto data = model.data(ph.sigma.field());

  io::write_grid(ctx.path("sigma.grid"), ph.sigma.field());
  io::write_pgm(ctx.path("sigma.pgm"), ph.sigma.field());
  std::ostringstream s;
  s << "rotations = " << data.size() << "\n"
    << "samples = " << model.time().samples() << "\n"
    << "points = " << model.boundary().size() << "\n"
    << "dt = " << num(model.time().dt) << "\n"
    << "ds = " << num(model.boundary().arc_length_step()) << "\n"
    << "sigma_w1inf = " << num(ph.w1inf) << "\n"
    << "poincare = " << num(ph.poincare) << "\n"
    << "smallness = " << num(ph.smallness) << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int r = static_cast<int>(i);
    io::write_trace(ctx.path(rotation_file("trace", r, "bin")), data[i]);
    if (ctx.cfg.experiment.write_csv) io::write_trace_csv(ctx.path(rotation_file("trace", r, "csv")), data[i]);
    s << "trace_" << std::setw(2) << std::setfill('0') << r << std::setfill(' ') << "_max_abs = "
      << num(data[i].max_abs()) << "\n";
  }
  io::write_text(ctx.path("simulate.txt"), s.str());
  return kExitOk;
}

int check_geometry(const Context& ctx) {
  const VisibilityReport rep = check_stability(ctx.setup, *ctx.mask, ctx.c, ctx.cfg.solver.n_dirs);
  std::ostringstream s;
  s << "stability_ok = " << (rep.stability_ok ? "true" : "false") << "\n"
    << "coverage_fraction = " << num(rep.coverage_fraction) << "\n"
    << "samples = " << rep.samples << "\n"
    << "uncovered = " << rep.uncovered_samples.size() << "\n"
    << "trapped = " << rep.trapped << "\n";
  bool all_unique = !rep.uniqueness_ok.empty();
  for (std::size_t i = 0; i < rep.uniqueness_ok.size(); ++i) {
    s << "uniqueness_" << i << " = " << (rep.uniqueness_ok[i] ? "true" : "false") << "\n";
    all_unique = all_unique && rep.uniqueness_ok[i];
  }
  s << "uniqueness_all = " << (all_unique ? "true" : "false") << "\n";
  s << "overlapping_rotations =";
  for (int i : rep.overlapping_rotations) s << " " << i;
  s << "\n";
  io::write_text(ctx.path("visibility.txt"), s.str());

  std::ostringstream u;
  u << "x,y,xi_x,xi_y\n" << std::setprecision(17);
  for (const auto& p : rep.uncovered_samples) u << p.x.x << ',' << p.x.y << ',' << p.xi.x << ',' << p.xi.y << '\n';
  io::write_text(ctx.path("uncovered.csv"), u.str());
  io::write_grid(ctx.path("coverage.grid"), rep.coverage);
  io::write_pgm(ctx.path("coverage.pgm"), rep.coverage);
  ctx.say(std::string("check-geometry: stability_ok = ") + (rep.stability_ok ? "true" : "false") +
          ", coverage " + num(rep.coverage_fraction));
  return kExitOk;
}

int analyze_operator(const Context& ctx) {
  const Phantom background = generate_phantom(ctx.cfg.medium.phantom, ctx.mask, 0.0);
  const ForwardModel model = ctx.model();
  const LinearizedOperator op(model, background.sigma.field());
  const Grid coarse = Grid::with_cells(ctx.cfg.experiment.coarse_cells, ctx.cfg.geometry.rho, ctx.cfg.geometry.margin);
  ctx.say("analyze-operator: assembling kappa on " + std::to_string(coarse.cells()) + "^2");
  const KappaMatrix km = assemble_kappa(op, coarse);
  const Eigen::VectorXd sv = singular_values(km.matrix);
  const SymbolWeight w = symbol_weight(model, op.fields(), ctx.cfg.solver.n_dirs);

  std::ostringstream spec;
  spec << "index,singular_value\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < sv.size(); ++k) spec << k << ',' << sv[k] << '\n';
  io::write_text(ctx.path("spectrum.csv"), spec.str());
  std::ostringstream nodes;
  nodes << "index,x,y\n" << std::setprecision(17);
  for (std::size_t k = 0; k < km.nodes.size(); ++k) nodes << k << ',' << km.nodes[k].x << ',' << km.nodes[k].y << '\n';
  io::write_text(ctx.path("kappa_nodes.csv"), nodes.str());
  io::write_matrix(ctx.path("kappa.bin"), km.matrix);

  const double smax = sv.size() ? sv[0] : 0.0;
  const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
  std::ostringstream s;
  s << "coarse_cells = " << coarse.cells() << "\n"
    << "nodes = " << km.nodes.size() << "\n"
    << "sigma_max = " << num(smax) << "\n"
    << "sigma_min = " << num(smin) << "\n"
    << "condition = " << num(smin > 0.0 ? smax / smin : INFINITY) << "\n"
    << "symbol_beta = " << num(w.beta) << "\n";
  io::write_text(ctx.path("operator.txt"), s.str());
  ctx.say("analyze-operator: sigma_min " + num(smin) + ", sigma_max " + num(smax));
  return kExitOk;
}

std::vector<BoundaryTrace> load_data(const Context& ctx, const ForwardModel& model) {
  const fs::path dir = ctx.cfg.experiment.data;
  std::vector<BoundaryTrace> data;
  const BoundaryTrace shape = model.zero_trace();
  for (int i = 0; i < model.rotation_count(); ++i) {
    const std::string file = (dir / rotation_file("trace", i, "bin")).string();
    BoundaryTrace d;
    try {
      d = io::read_trace(file);
    } catch (const Error& e) {
      throw ConfigError(std::string("experiment.data: ") + e.what());
    }
    if (!d.same_shape(shape))
      throw ConfigError("experiment.data: " + file + " does not match the configured grid and times");
    data.push_back(std::move(d));
  }
  return data;
}

int reconstruct_mode(const Context& ctx) {
  const auto& x = ctx.cfg.experiment;
  const ForwardModel model = ctx.model();
  std::optional<AbsorptionMap> truth;
  std::vector<BoundaryTrace> data;
  if (!x.data.empty()) {
    data = load_data(ctx, model);
    const fs::path truth_file = fs::path(x.data) / "sigma.grid";
    if (fs::exists(truth_file)) {
      try {
        truth.emplace(io::read_grid(truth_file.string(), ctx.grid), ctx.mask);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("experiment.data: sigma.grid: ") + e.what());
      }
    }
    ctx.say("reconstruct: loaded " + std::to_string(data.size()) + " traces from " + x.data);
  } else {
    truth.emplace(generate_phantom(ctx.cfg.medium.phantom, ctx.mask, 0.0).sigma);
    data = model.data(truth->field());
    ctx.say("reconstruct: simulated " + std::to_string(data.size()) + " traces");
  }
  if (x.noise > 0.0) {
    double peak = 0.0;
    for (const auto& d : data) peak = std::max(peak, d.max_abs());
    std::mt19937_64 rng(splitmix64(x.seed));
    for (auto& d : data)
      for (double& v : d.raw()) v += x.noise * peak * gaussian(rng);
  }

  ReconstructionOptions o;
  o.max_iterations = ctx.cfg.solver.max_iterations;
  o.step = ctx.cfg.solver.step;
  o.tol = ctx.cfg.solver.residual_tol;
  o.floor_fraction = ctx.cfg.solver.floor_fraction;
  o.n_dirs = ctx.cfg.solver.n_dirs;
  o.progress = [&ctx](int k, double r) { ctx.say("  iteration " + std::to_string(k) + ": residual " + num(r)); };
  const ReconstructionState st =
      reconstruct(model, data, AbsorptionMap::zero(ctx.mask), o, truth ? &*truth : nullptr);

  std::ostringstream h;
  h << "iteration,residual,l2_error,h1_error\n" << std::setprecision(17);
  for (const auto& r : st.history) h << r.k << ',' << r.residual << ',' << r.l2_error << ',' << r.h1_error << '\n';
  io::write_text(ctx.path("history.csv"), h.str());
  io::write_grid(ctx.path("sigma_hat.grid"), st.sigma.field());
  io::write_pgm(ctx.path("sigma_hat.pgm"), st.sigma.field());

  std::ostringstream s;
  s << "iterations = " << st.iterations << "\n"
    << "converged = " << (st.converged ? "true" : "false") << "\n"
    << "diverged = " << (st.diverged ? "true" : "false") << "\n";
  if (!st.history.empty()) {
    s << "final_residual = " << num(st.history.back().residual) << "\n";
    if (truth) {
      s << "final_l2_error = " << num(st.history.back().l2_error) << "\n"
        << "final_h1_error = " << num(st.history.back().h1_error) << "\n";
    }
  }
  if (!st.message.empty()) s << "message = " << st.message << "\n";
  io::write_text(ctx.path("reconstruction.txt"), s.str());
  if (st.diverged) throw SolverError(st.message,
                                     st.history.empty() ? 0.0 : st.history.back().residual, st.iterations);
  return kExitOk;
}

int stability_sweep(const Context& ctx) {
  const auto& x = ctx.cfg.experiment;
  const ForwardModel model = ctx.model();
  const double cpo = poincare_constant(*ctx.mask);
  std::vector<std::pair<AbsorptionMap, AbsorptionMap>> pairs;
  for (int p = 0; p < x.pairs; ++p) {
    const auto s1 = splitmix64(x.seed * 2654435761ull + static_cast<std::uint64_t>(2 * p));
    const auto s2 = splitmix64(x.seed * 2654435761ull + static_cast<std::uint64_t>(2 * p + 1));
    pairs.emplace_back(generate_phantom(random_phantom(ctx.mask->omega(), s1, 2, x.pair_amplitude), ctx.mask, cpo).sigma,
                       generate_phantom(random_phantom(ctx.mask->omega(), s2, 2, x.pair_amplitude), ctx.mask, cpo).sigma);
  }
  ctx.say("stability-sweep: " + std::to_string(pairs.size()) + " pairs");
  const StabilityReport rep = stability_experiment(model, pairs);

  std::ostringstream c;
  c << "pair,sigma_difference,data_difference,ratio,smallness,excluded,zero_data\n" << std::setprecision(17);
  for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
    const auto& r = rep.pairs[p];
    c << p << ',' << r.sigma_difference << ',' << r.data_difference << ',' << r.ratio << ',' << r.smallness << ','
      << (r.excluded ? 1 : 0) << ',' << (r.zero_data ? 1 : 0) << '\n';
  }
  io::write_text(ctx.path("stability.csv"), c.str());
  std::ostringstream s;
  s << "tested = " << rep.tested << "\n"
    << "c_star = " << num(rep.c_star) << "\n"
    << "max_smallness = " << num(rep.max_smallness) << "\n"
    << "poincare = " << num(rep.poincare) << "\n"
    << "injectivity_violated = " << (rep.injectivity_violated ? "true" : "false") << "\n";
  io::write_text(ctx.path("stability.txt"), s.str());
  ctx.say("stability-sweep: C* = " + num(rep.c_star));
  return kExitOk;
}

double bessel_i0(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60 && term > 1e-18 * sum; ++k) {
    term *= (x * x / 4.0) / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

// Small, fast versions of the solver oracles.
int self_test(const Context& ctx) {
  struct Check {
    std::string name;
    double value;
    double limit;
  };
  std::vector<Check> checks;

  {
    const Grid g = Grid::with_cells(64);
    const auto mask = std::make_shared<const DomainMask>(build_mask(g, 0.35));
    const auto one = BoundaryFunction::from_function(BoundaryParametrization::for_grid(g), [](double) { return 1.0; });
    ScalarField sigma(g, 0.0);
    for (std::size_t k = 0; k < g.node_count(); ++k) sigma[k] = 1.0;
    const auto u = DiffusionSolver(g).solve(sigma, one);
    double err = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      if (!mask->in_ball(k)) continue;
      const double exact = bessel_i0(norm(g.node(k))) / bessel_i0(1.0);
      err = std::max(err, std::abs(u.u[k] - exact) / exact);
    }
    checks.push_back({"diffusion_bessel_linf", err, 1e-2});
    const double cp = poincare_constant(*mask);
    checks.push_back({"poincare_relative", std::abs(cp - 0.35 / 2.404825557695773) / (0.35 / 2.404825557695773), 2e-2});
  }
  {
    const Grid g = Grid::with_cells(32);
    const Point x{0.1, 0.2}, xi{0.6, 0.8};
    const Ray r = trace_ray(x, xi, SoundSpeedMap::constant(g));
    const double b = dot(x, xi), cc = dot(x, x) - 1.0;
    const double tp = -b + std::sqrt(b * b - cc);
    checks.push_back({"ray_exit_time", std::abs(r.tau_plus - tp), 1e-6});
  }
  {
    const Grid g = Grid::with_cells(48);
    WaveOptions o;
    o.record_energy = true;
    const WaveSolver w(g, SoundSpeedMap::constant(g), BoundaryParametrization::for_grid(g), 1.0, o);
    const auto H = ScalarField::from_function(g, [](Point p) { return std::exp(-dot(p, p) / 0.02); });
    const Propagation prop = w.propagate(H);
    double drift = 0.0;
    for (double e : prop.energy) drift = std::max(drift, std::abs(e - prop.energy.front()) / prop.energy.front());
    checks.push_back({"wave_energy_drift", drift, 1e-4});
  }
  {
    const std::string text = to_ini(ctx.cfg);
    std::istringstream in(text);
    checks.push_back({"config_round_trip", to_ini(parse_config(in)) == text ? 0.0 : 1.0, 0.5});
  }
  {
    const auto f = ScalarField::from_function(ctx.grid, [](Point p) { return std::sin(3.0 * p.x) + p.y / 7.0; });
    const std::string file = ctx.path("selftest_roundtrip.grid");
    io::write_grid(file, f);
    const ScalarField back = io::read_grid(file, ctx.grid);
    fs::remove(file);
    checks.push_back({"grid_io_round_trip", back.raw() == f.raw() ? 0.0 : 1.0, 0.5});
  }

  std::ostringstream s;
  bool ok = true;
  for (const auto& c : checks) {
    const bool pass = c.value <= c.limit;
    ok = ok && pass;
    s << (pass ? "PASS " : "FAIL ") << c.name << " value=" << num(c.value) << " limit=" << num(c.limit) << "\n";
  }
  io::write_text(ctx.path("selftest.txt"), s.str());
  if (ctx.log) *ctx.log << s.str();
  return ok ? kExitOk : kExitSelfTest;
}

std::string manifest(const ExperimentConfig& cfg, const RunOptions& opts, double wall, int code) {
  std::ostringstream o;
  o << to_ini(cfg) << "\n[run]\n"
    << "version = " << kVersion << "\n"
    << "seed = " << cfg.experiment.seed << "\n"
    << "threads = " << kernels::max_threads() << "\n"
    << "wall_time = " << num(wall) << "\n"
    << "exit_code = " << code << "\n";
  if (!opts.command.empty()) o << "command = " << opts.command << "\n";
  return o.str();
}

}  // namespace

RunResult run(ExperimentConfig config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  auto fail = [&](int code, const std::string& msg) {
    result.exit_code = code;
    result.message = msg;
    if (options.log) *options.log << "error: " << msg << std::endl;
  };

  if (options.output) config.experiment.output = *options.output;
  if (options.seed) config.experiment.seed = *options.seed;
  if (options.threads < 0) {
    fail(kExitConfig, "--threads: must be nonnegative");
    return result;
  }
  if (options.threads > 0) kernels::set_threads(options.threads);
  try {
    validate(config);
  } catch (const Error& e) {
    fail(kExitConfig, e.what());
    return result;
  }
  result.output_dir = config.experiment.output;

  try {
    io::ensure_directory(config.experiment.output);
    const Grid grid = build_grid(config);
    auto mask = std::make_shared<const DomainMask>(
        build_mask(grid, config.geometry.omega_radius, config.geometry.omega_center));
    SoundSpeedMap c = build_sound_speed(config, grid);
    AcquisitionSetup setup = build_setup(config, c.c0());
    const Context ctx{config, config.experiment.output, options.log, grid, mask, std::move(c), std::move(setup)};

    switch (config.experiment.mode) {
      case Mode::simulate: result.exit_code = simulate(ctx); break;
      case Mode::check_geometry: result.exit_code = check_geometry(ctx); break;
      case Mode::analyze_operator: result.exit_code = analyze_operator(ctx); break;
      case Mode::reconstruct: result.exit_code = reconstruct_mode(ctx); break;
      case Mode::stability_sweep: result.exit_code = stability_sweep(ctx); break;
      case Mode::self_test: result.exit_code = self_test(ctx); break;
    }
    if (result.exit_code == kExitSelfTest) result.message = "self-test failed";
  } catch (const ConfigError& e) {
    fail(kExitConfig, e.what());
  } catch (const GeometryError& e) {
    fail(kExitConfig, e.what());
  } catch (const std::invalid_argument& e) {
    fail(kExitConfig, e.what());
  } catch (const std::exception& e) {
    fail(kExitSolver, e.what());
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    io::write_text((fs::path(config.experiment.output) / "manifest.ini").string(),
                   manifest(config, options, wall, result.exit_code));
  } catch (const std::exception& e) {
    if (result.exit_code == kExitOk) fail(kExitSolver, e.what());
  }
  return result;
}

}  // namespace rotopat
