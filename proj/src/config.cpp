#include "rotopat/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rotopat/errors.hpp"

namespace rotopat {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

double parse_number(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad(field, "expected a number, got '" + t + "'");
  if (!std::isfinite(v)) bad(field, "value must be finite");
  return v;
}

long long parse_integer(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad(field, "expected an integer, got '" + t + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(field, "expected true or false, got '" + t + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, field));
  return out;
}

Point parse_point(const std::string& text, const std::string& field) {
  const auto v = parse_numbers(text, field);
  if (v.size() != 2) bad(field, "expected two numbers 'x y'");
  return {v[0], v[1]};
}

std::optional<Bump> parse_bump(const std::string& text, const std::string& field) {
  if (trim(text) == "none") return std::nullopt;
  const auto v = parse_numbers(text, field);
  if (v.size() != 5) bad(field, "expected 'cx cy radius amplitude taper'");
  return Bump{{v[0], v[1]}, v[2], v[3], v[4]};
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(Point p) { return fmt(p.x) + " " + fmt(p.y); }

std::string fmt(const Bump& b) {
  return fmt(b.center) + " " + fmt(b.radius) + " " + fmt(b.amplitude) + " " + fmt(b.taper);
}

using Handlers = std::map<std::string, std::function<void(const std::string&, const std::string&)>>;

}  // namespace

double parse_angle(const std::string& text, const std::string& field) {
  std::string t = trim(text);
  const auto p = t.find("pi");
  if (p == std::string::npos) return parse_number(t, field);
  // [coef[*]]pi[/den]
  std::string coef = trim(t.substr(0, p));
  std::string rest = trim(t.substr(p + 2));
  double c = 1.0;
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  if (coef == "-") c = -1.0;
  else if (coef == "+" || coef.empty()) c = 1.0;
  else c = parse_number(coef, field);
  double d = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') bad(field, "cannot parse angle '" + t + "'");
    d = parse_number(rest.substr(1), field);
    if (d == 0.0) bad(field, "division by zero in angle");
  }
  return c * kPi / d;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::reconstruct: return "reconstruct";
    case Mode::check_geometry: return "check-geometry";
    case Mode::analyze_operator: return "analyze-operator";
    case Mode::stability_sweep: return "stability-sweep";
    case Mode::self_test: return "self-test";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::simulate, Mode::reconstruct, Mode::check_geometry, Mode::analyze_operator,
                 Mode::stability_sweep, Mode::self_test})
    if (name == mode_name(m)) return m;
  throw ConfigError("experiment.mode: unknown mode '" + name + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  auto& g = c.geometry;
  auto& a = c.acquisition;
  auto& m = c.medium;
  auto& s = c.solver;
  auto& x = c.experiment;
  auto num = [](double& dst) { return [&dst](const std::string& v, const std::string& f) { dst = parse_number(v, f); }; };
  auto ang = [](double& dst) { return [&dst](const std::string& v, const std::string& f) { dst = parse_angle(v, f); }; };
  auto integer = [](int& dst) {
    return [&dst](const std::string& v, const std::string& f) { dst = static_cast<int>(parse_integer(v, f)); };
  };

  std::map<std::string, Handlers> sections;
  sections["geometry"] = {
      {"rho", num(g.rho)},
      {"cells", integer(g.cells)},
      {"margin", num(g.margin)},
      {"omega_radius", num(g.omega_radius)},
      {"omega_center", [&](const std::string& v, const std::string& f) { g.omega_center = parse_point(v, f); }},
  };
  sections["acquisition"] = {
      {"illumination",
       [&](const std::string& v, const std::string& f) {
         const std::string t = trim(v);
         if (t == "bump") a.illumination = IlluminationShape::bump;
         else if (t == "uniform") a.illumination = IlluminationShape::uniform;
         else bad(f, "expected bump or uniform, got '" + t + "'");
       }},
      {"illumination_center", ang(a.illumination_center)},
      {"illumination_half_width", ang(a.illumination_half_width)},
      {"illumination_amplitude", num(a.illumination_amplitude)},
      {"transducer_center", ang(a.transducer_center)},
      {"transducer_half_width", ang(a.transducer_half_width)},
      {"rotations", integer(a.rotations)},
      {"rotation_angles",
       [&](const std::string& v, const std::string& f) {
         a.rotation_angles.clear();
         for (const auto& tok : split(v, ',')) a.rotation_angles.push_back(parse_angle(tok, f));
       }},
      {"duration", num(a.duration)},
      {"total_time", num(a.total_time)},
      {"angle_taper", ang(a.angle_taper)},
      {"time_taper", num(a.time_taper)},
  };
  sections["medium"] = {
      {"bumps",
       [&](const std::string& v, const std::string& f) {
         m.phantom.bumps.clear();
         if (trim(v) == "none") return;
         for (const auto& part : split(v, ';'))
           if (auto b = parse_bump(part, f)) m.phantom.bumps.push_back(*b);
       }},
      {"plateau", [&](const std::string& v, const std::string& f) { m.phantom.plateau = parse_bump(v, f); }},
      {"sound_speed",
       [&](const std::string& v, const std::string& f) {
         const std::string t = trim(v);
         if (t == "constant") m.sound_speed = SoundSpeedKind::constant;
         else if (t == "gaussian") m.sound_speed = SoundSpeedKind::gaussian;
         else bad(f, "expected constant or gaussian, got '" + t + "'");
       }},
      {"c_amplitude", num(m.c_amplitude)},
      {"c_width", num(m.c_width)},
      {"c_center", [&](const std::string& v, const std::string& f) { m.c_center = parse_point(v, f); }},
  };
  sections["solver"] = {
      {"diffusion_tol", num(s.diffusion_tol)},
      {"diffusion_max_iterations", integer(s.diffusion_max_iterations)},
      {"cfl", num(s.cfl)},
      {"sponge_strength", num(s.sponge_strength)},
      {"max_iterations", integer(s.max_iterations)},
      {"step", num(s.step)},
      {"residual_tol", num(s.residual_tol)},
      {"floor_fraction", num(s.floor_fraction)},
      {"n_dirs", integer(s.n_dirs)},
  };
  sections["experiment"] = {
      {"mode", [&](const std::string& v, const std::string&) { x.mode = parse_mode(trim(v)); }},
      {"seed",
       [&](const std::string& v, const std::string& f) {
         const std::string t = trim(v);
         const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x.seed);
         if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
           bad(f, "expected a nonnegative 64-bit integer, got '" + t + "'");
       }},
      {"output", [&](const std::string& v, const std::string&) { x.output = trim(v); }},
      {"data", [&](const std::string& v, const std::string&) { x.data = trim(v); }},
      {"noise", num(x.noise)},
      {"pairs", integer(x.pairs)},
      {"pair_amplitude", num(x.pair_amplitude)},
      {"coarse_cells", integer(x.coarse_cells)},
      {"write_csv", [&](const std::string& v, const std::string& f) { x.write_csv = parse_bool(v, f); }},
  };

  for (const auto& [section, body] : tree) {
    if (section == "run") continue;
    const auto it = sections.find(section);
    if (it == sections.end()) {
      if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto h = it->second.find(key);
      if (h == it->second.end()) throw ConfigError(field + ": unknown key");
      h->second(value.data(), field);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

Grid build_grid(const ExperimentConfig& c) {
  return Grid::with_cells(c.geometry.cells, c.geometry.rho, c.geometry.margin);
}

AcquisitionSetup build_setup(const ExperimentConfig& c, double c0) {
  const auto& a = c.acquisition;
  const double rho = c.geometry.rho;
  AcquisitionSetup s = AcquisitionSetup::defaults(a.rotations, rho, c0);
  s.illumination = {a.illumination, a.illumination_center, a.illumination_half_width, a.illumination_amplitude};
  s.transducer = {a.transducer_center, a.transducer_half_width};
  if (!a.rotation_angles.empty()) s.rotations = a.rotation_angles;
  if (a.duration > 0.0) {
    const double d = a.duration;
    s.duration = [d](double) { return d; };
  }
  if (a.total_time > 0.0) s.total_time = a.total_time;
  s.angle_taper = a.angle_taper;
  s.time_taper = a.time_taper;
  return s;
}

SoundSpeedMap build_sound_speed(const ExperimentConfig& c, const Grid& grid) {
  if (c.medium.sound_speed == SoundSpeedKind::constant) return SoundSpeedMap::constant(grid);
  const double amp = c.medium.c_amplitude;
  const double width = c.medium.c_width;
  const Point center = c.medium.c_center;
  return SoundSpeedMap::from_profile(grid, [amp, width, center](Point p) {
    const Point d = p - center;
    return 1.0 + amp * std::exp(-dot(d, d) / width);
  });
}

WaveOptions build_wave_options(const ExperimentConfig& c) {
  WaveOptions o;
  o.cfl = c.solver.cfl;
  o.sponge_strength = c.solver.sponge_strength;
  return o;
}

void validate(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  if (!(g.rho > 0.0)) bad("geometry.rho", "must be positive");
  if (g.cells < 16) bad("geometry.cells", "must be at least 16");
  if (!(g.margin >= 0.0)) bad("geometry.margin", "must be nonnegative");
  if (!(g.omega_radius >= 0.0)) bad("geometry.omega_radius", "must be nonnegative");
  const Grid grid = build_grid(c);
  std::shared_ptr<const DomainMask> mask;
  try {
    mask = std::make_shared<const DomainMask>(build_mask(grid, g.omega_radius, g.omega_center));
  } catch (const GeometryError& e) {
    bad("geometry.omega_radius", e.what());
  }

  const auto& a = c.acquisition;
  if (a.rotations < 1 && a.rotation_angles.empty()) bad("acquisition.rotations", "must be at least 1");
  if (!(a.transducer_half_width > 0.0)) bad("acquisition.transducer_half_width", "must be positive");
  if (a.illumination == IlluminationShape::bump && !(a.illumination_half_width > 0.0))
    bad("acquisition.illumination_half_width", "must be positive");
  if (!(a.illumination_amplitude > 0.0)) bad("acquisition.illumination_amplitude", "must be positive");
  if (!(a.angle_taper > 0.0)) bad("acquisition.angle_taper", "must be positive");
  if (!(a.time_taper > 0.0)) bad("acquisition.time_taper", "must be positive");
  if (a.total_time > 0.0 && a.duration > a.total_time)
    bad("acquisition.duration", "must not exceed total_time");
  const auto& m = c.medium;
  if (m.sound_speed == SoundSpeedKind::gaussian) {
    if (!(m.c_amplitude > -1.0)) bad("medium.c_amplitude", "sound speed must stay positive (amplitude > -1)");
    if (!(m.c_width > 0.0)) bad("medium.c_width", "must be positive");
  }
  const SoundSpeedMap cmap = build_sound_speed(c, grid);
  try {
    build_setup(c, cmap.c0()).validate();
  } catch (const GeometryError& e) {
    bad("acquisition", e.what());
  }
  try {
    generate_phantom(m.phantom, mask, 0.0);
  } catch (const GeometryError& e) {
    bad("medium.bumps", e.what());
  }

  const auto& s = c.solver;
  if (!(s.diffusion_tol > 0.0)) bad("solver.diffusion_tol", "must be positive");
  if (s.diffusion_max_iterations < 0) bad("solver.diffusion_max_iterations", "must be nonnegative");
  if (!(s.cfl > 0.0) || s.cfl > 0.5) bad("solver.cfl", "must lie in (0, 0.5]");
  if (!(s.sponge_strength >= 0.0)) bad("solver.sponge_strength", "must be nonnegative");
  if (s.max_iterations < 0) bad("solver.max_iterations", "must be nonnegative");
  if (!(s.step > 0.0)) bad("solver.step", "must be positive");
  if (!(s.residual_tol >= 0.0)) bad("solver.residual_tol", "must be nonnegative");
  if (!(s.floor_fraction > 0.0) || s.floor_fraction > 1.0) bad("solver.floor_fraction", "must lie in (0, 1]");
  if (s.n_dirs < 8) bad("solver.n_dirs", "must be at least 8");

  const auto& x = c.experiment;
  if (x.output.empty()) bad("experiment.output", "must not be empty");
  if (!(x.noise >= 0.0)) bad("experiment.noise", "must be nonnegative");
  if (x.pairs < 1) bad("experiment.pairs", "must be at least 1");
  if (!(x.pair_amplitude > 0.0)) bad("experiment.pair_amplitude", "must be positive");
  if (x.coarse_cells < 16) bad("experiment.coarse_cells", "must be at least 16");
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto& g = c.geometry;
  o << "[geometry]\n"
    << "rho = " << fmt(g.rho) << "\n"
    << "cells = " << g.cells << "\n"
    << "margin = " << fmt(g.margin) << "\n"
    << "omega_radius = " << fmt(g.omega_radius) << "\n"
    << "omega_center = " << fmt(g.omega_center) << "\n\n";
  const auto& a = c.acquisition;
  o << "[acquisition]\n"
    << "illumination = " << (a.illumination == IlluminationShape::bump ? "bump" : "uniform") << "\n"
    << "illumination_center = " << fmt(a.illumination_center) << "\n"
    << "illumination_half_width = " << fmt(a.illumination_half_width) << "\n"
    << "illumination_amplitude = " << fmt(a.illumination_amplitude) << "\n"
    << "transducer_center = " << fmt(a.transducer_center) << "\n"
    << "transducer_half_width = " << fmt(a.transducer_half_width) << "\n"
    << "rotations = " << a.rotations << "\n";
  if (!a.rotation_angles.empty()) {
    o << "rotation_angles = ";
    for (std::size_t i = 0; i < a.rotation_angles.size(); ++i) o << (i ? ", " : "") << fmt(a.rotation_angles[i]);
    o << "\n";
  }
  o << "duration = " << fmt(a.duration) << "\n"
    << "total_time = " << fmt(a.total_time) << "\n"
    << "angle_taper = " << fmt(a.angle_taper) << "\n"
    << "time_taper = " << fmt(a.time_taper) << "\n\n";
  const auto& m = c.medium;
  o << "[medium]\nbumps = ";
  if (m.phantom.bumps.empty()) o << "none";
  for (std::size_t i = 0; i < m.phantom.bumps.size(); ++i) o << (i ? "; " : "") << fmt(m.phantom.bumps[i]);
  o << "\nplateau = " << (m.phantom.plateau ? fmt(*m.phantom.plateau) : std::string("none")) << "\n"
    << "sound_speed = " << (m.sound_speed == SoundSpeedKind::constant ? "constant" : "gaussian") << "\n"
    << "c_amplitude = " << fmt(m.c_amplitude) << "\n"
    << "c_width = " << fmt(m.c_width) << "\n"
    << "c_center = " << fmt(m.c_center) << "\n\n";
  const auto& s = c.solver;
  o << "[solver]\n"
    << "diffusion_tol = " << fmt(s.diffusion_tol) << "\n"
    << "diffusion_max_iterations = " << s.diffusion_max_iterations << "\n"
    << "cfl = " << fmt(s.cfl) << "\n"
    << "sponge_strength = " << fmt(s.sponge_strength) << "\n"
    << "max_iterations = " << s.max_iterations << "\n"
    << "step = " << fmt(s.step) << "\n"
    << "residual_tol = " << fmt(s.residual_tol) << "\n"
    << "floor_fraction = " << fmt(s.floor_fraction) << "\n"
    << "n_dirs = " << s.n_dirs << "\n\n";
  const auto& x = c.experiment;
  o << "[experiment]\n"
    << "mode = " << mode_name(x.mode) << "\n"
    << "seed = " << x.seed << "\n"
    << "output = " << x.output << "\n";
  if (!x.data.empty()) o << "data = " << x.data << "\n";
  o << "noise = " << fmt(x.noise) << "\n"
    << "pairs = " << x.pairs << "\n"
    << "pair_amplitude = " << fmt(x.pair_amplitude) << "\n"
    << "coarse_cells = " << x.coarse_cells << "\n"
    << "write_csv = " << (x.write_csv ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace rotopat
