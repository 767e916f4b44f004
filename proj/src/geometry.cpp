#include "rotopat/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "rotopat/errors.hpp"

namespace rotopat {

DomainMask build_mask(const Grid& grid, double omega_radius, Point omega_center) {
  if (omega_radius < 0.0) throw GeometryError("omega radius must be nonnegative");
  const double clearance = 2.0 * grid.spacing();
  if (omega_radius > 0.0 && norm(omega_center) + omega_radius + clearance > grid.rho()) {
    std::ostringstream os;
    os << "omega disk (center " << omega_center.x << "," << omega_center.y << ", radius " << omega_radius
       << ") is not compactly contained in B_rho with 2h = " << clearance << " clearance";
    throw GeometryError(os.str());
  }
  DomainMask mask(grid);
  mask.omega_ = {omega_center, omega_radius};
  mask.inside_ball_.assign(grid.node_count(), 0);
  mask.inside_omega_.assign(grid.node_count(), 0);
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.node(k);
    if (norm(p) < grid.rho()) mask.inside_ball_[k] = 1;
    if (mask.omega_.contains(p)) {
      mask.inside_omega_[k] = 1;
      mask.omega_nodes_.push_back(k);
    }
  }
  return mask;
}

BoundaryParametrization::BoundaryParametrization(int n_points, double rho) : n_(n_points), rho_(rho) {
  if (n_points < 8) throw std::invalid_argument("need at least 8 boundary points");
  if (!(rho > 0.0)) throw std::invalid_argument("boundary radius must be positive");
}

BoundaryParametrization BoundaryParametrization::for_grid(const Grid& grid) {
  const double per_cell = kTwoPi * grid.rho() / grid.spacing();
  const int n = 8 * static_cast<int>(std::ceil(per_cell / 8.0));
  return {n, grid.rho()};
}

Point BoundaryParametrization::point(int k) const {
  const double a = angle(k);
  return {rho_ * std::cos(a), rho_ * std::sin(a)};
}

BoundaryFunction::BoundaryFunction(BoundaryParametrization param, std::vector<double> values)
    : param_(param), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != param_.size())
    throw std::invalid_argument("boundary function size does not match parametrization");
}

double BoundaryFunction::at(double angle) const {
  const int n = param_.size();
  double u = wrap_angle(angle) / param_.angle_step();
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < 1e-9) {
    const int k = static_cast<int>(nearest) % n;
    return values_[static_cast<std::size_t>(k)];
  }
  const int k0 = static_cast<int>(std::floor(u));
  const double t = u - k0;
  const int a = k0 % n;
  const int b = (k0 + 1) % n;
  return (1.0 - t) * values_[static_cast<std::size_t>(a)] + t * values_[static_cast<std::size_t>(b)];
}

BoundaryFunction rotate_boundary_function(const BoundaryFunction& f, double theta) {
  const auto& p = f.param();
  return BoundaryFunction::from_function(p, [&](double a) { return f.at(a + theta); });
}

bool Arc::contains(double angle) const {
  return full() || std::abs(angle_difference(angle, center)) <= half_width;
}

double cosine_taper(double x, double edge, double width) {
  if (x >= edge) return 0.0;
  const double start = edge - width;
  if (x <= start) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (x - start) / width));
}

double Illumination::operator()(double angle) const {
  if (shape == IlluminationShape::uniform) return amplitude;
  const double d = std::abs(angle_difference(angle, center));
  // Bump with zero-width plateau: 0.5 (1 + cos(pi d / w)).
  return amplitude * cosine_taper(d, half_width, half_width);
}

Arc Illumination::support() const {
  if (shape == IlluminationShape::uniform) return {0.0, kPi};
  return {center, half_width};
}

std::vector<double> AcquisitionSetup::equispaced_rotations(int m) {
  std::vector<double> r(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = kTwoPi * i / m;
  return r;
}

AcquisitionSetup AcquisitionSetup::defaults(int m, double rho, double c0) {
  AcquisitionSetup s;
  s.rotations = equispaced_rotations(m);
  const double duration = 2.2 * rho / c0;
  s.duration = [duration](double) { return duration; };
  s.total_time = 2.4 * rho / c0;
  s.time_taper = 0.1 * rho / c0;
  return s;
}

BoundaryFunction AcquisitionSetup::illumination_for(int i, const BoundaryParametrization& param) const {
  const auto base = BoundaryFunction::from_function(param, [&](double a) { return illumination(a); });
  return rotate_boundary_function(base, rotations.at(static_cast<std::size_t>(i)));
}

Cutoff AcquisitionSetup::cutoff(int i) const { return Cutoff(arc(i), duration, angle_taper, time_taper); }

Arc AcquisitionSetup::illumination_support(int i) const {
  return illumination.support().rotated(-rotations.at(static_cast<std::size_t>(i)));
}

std::vector<int> overlapping_rotations(const AcquisitionSetup& setup) {
  std::vector<int> out;
  for (int i = 0; i < setup.rotation_count(); ++i) {
    const Arc a = setup.illumination_support(i);
    const Arc b = setup.arc(i);
    if (a.full() || b.full() || std::abs(angle_difference(a.center, b.center)) < a.half_width + b.half_width)
      out.push_back(i);
  }
  return out;
}

double AcquisitionSetup::max_duration() const {
  double m = 0.0;
  for (int k = 0; k < 720; ++k) {
    const double a = kTwoPi * k / 720;
    for (int i = 0; i < rotation_count(); ++i)
      if (arc(i).contains(a)) m = std::max(m, duration(a));
  }
  return m;
}

void AcquisitionSetup::validate() const {
  if (rotations.empty()) throw GeometryError("acquisition needs at least one rotation");
  if (!duration) throw GeometryError("recording duration s(y) is not set");
  if (!(illumination.amplitude > 0.0))
    throw GeometryError("illumination must be nonnegative and not identically zero");
  if (illumination.shape == IlluminationShape::bump && !(illumination.half_width > 0.0))
    throw GeometryError("illumination bump needs a positive half width");
  if (!(transducer.half_width > 0.0)) throw GeometryError("transducer arc needs a positive half width");
  if (!(angle_taper > 0.0) || !(time_taper > 0.0)) throw GeometryError("cutoff tapers must be positive");
  if (!transducer.full() && !(angle_taper < transducer.half_width))
    throw GeometryError("angular taper is wider than half the transducer arc");
  double s_min = 1e300;
  for (int k = 0; k < 720; ++k) {
    const double a = kTwoPi * k / 720;
    for (int i = 0; i < rotation_count(); ++i) {
      if (!arc(i).contains(a)) continue;
      const double s = duration(a);
      if (s < 0.0) throw GeometryError("recording duration must be nonnegative");
      s_min = std::min(s_min, s);
    }
  }
  if (s_min < 1e300 && s_min > 0.0 && !(time_taper < 0.5 * s_min))
    throw GeometryError("time taper must be shorter than half the recording duration");
  if (illumination.shape == IlluminationShape::bump && !transducer.full()) {
    const double gap = std::abs(angle_difference(illumination.center, transducer.center));
    if (gap < illumination.half_width + transducer.half_width)
      throw GeometryError("illumination arc overlaps the transducer arc");
  }
  if (total_time < max_duration()) throw GeometryError("total time T is shorter than max s(y)");
}

Cutoff::Cutoff(Arc arc, std::function<double(double)> duration, double angle_taper, double time_taper)
    : arc_(arc), duration_(std::move(duration)), angle_taper_(angle_taper), time_taper_(time_taper) {
  if (!(angle_taper > 0.0) || !(time_taper > 0.0)) throw GeometryError("cutoff tapers must be positive");
  if (!arc.full() && angle_taper > arc.half_width) throw GeometryError("cutoff taper is wider than the arc");
}

double Cutoff::angle_factor(double angle) const {
  if (arc_.full()) return 1.0;
  const double d = std::abs(angle_difference(angle, arc_.center));
  return cosine_taper(d, arc_.half_width, angle_taper_);
}

double Cutoff::operator()(double angle, double t) const {
  const double a = angle_factor(angle);
  if (a == 0.0) return 0.0;
  return a * cosine_taper(t, duration_(angle), time_taper_);
}

bool Cutoff::on_plateau(double angle, double t) const {
  const bool in_arc =
      arc_.full() || std::abs(angle_difference(angle, arc_.center)) <= arc_.half_width - angle_taper_;
  return in_arc && t <= duration_(angle) - time_taper_;
}

BoundaryTrace Cutoff::sample(const BoundaryParametrization& param, TimeAxis time) const {
  BoundaryTrace chi(time, param.size());
  for (int k = 0; k < param.size(); ++k) {
    const double a = param.angle(k);
    const double af = angle_factor(a);
    if (af == 0.0) continue;
    const double s = duration_(a);
    for (int n = 0; n < time.samples(); ++n) chi(n, k) = af * cosine_taper(time.time(n), s, time_taper_);
  }
  return chi;
}

BoundaryTrace build_cutoff(const AcquisitionSetup& setup, int i, const BoundaryParametrization& param,
                           TimeAxis time) {
  return setup.cutoff(i).sample(param, time);
}

}  // namespace rotopat
