#include "rotopat/phantom.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rotopat/errors.hpp"
#include "rotopat/inverse.hpp"

namespace rotopat {

double Bump::max_gradient() const { return amplitude * kPi / (2.0 * taper); }

namespace {

void check_bump(const Bump& b, const Disk& omega, const char* what) {
  std::ostringstream os;
  if (!(b.radius > 0.0) || !(b.taper > 0.0) || b.taper > b.radius) {
    os << what << " needs 0 < taper <= radius (radius " << b.radius << ", taper " << b.taper << ")";
    throw GeometryError(os.str());
  }
  if (!(b.amplitude >= 0.0)) {
    os << what << " amplitude must be nonnegative, got " << b.amplitude;
    throw GeometryError(os.str());
  }
  if (!(norm(b.center - omega.center) + b.radius < omega.radius)) {
    os << what << " at (" << b.center.x << ", " << b.center.y << ") with radius " << b.radius
       << " is not strictly inside omega";
    throw GeometryError(os.str());
  }
}

// Uniform double in [0, 1) from the top 53 bits; fixed across platforms.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec, std::shared_ptr<const DomainMask> mask, double poincare) {
  const Disk& omega = mask->omega();
  for (const auto& b : spec.bumps) check_bump(b, omega, "bump");
  if (spec.plateau) check_bump(*spec.plateau, omega, "plateau");

  const Grid& g = mask->grid();
  ScalarField f(g);
  for (std::size_t k : mask->omega_nodes()) {
    const Point x = g.node(k);
    double v = spec.plateau ? (*spec.plateau)(x) : 0.0;
    for (const auto& b : spec.bumps) v += b(x);
    f[k] = v;
  }
  const double w1 = w1inf_norm(f);
  const double c = poincare >= 0.0 ? poincare : (mask->omega_count() ? poincare_constant(*mask) : 0.0);
  return {AbsorptionMap(std::move(f), std::move(mask)), w1, c, c * w1};
}

PhantomSpec random_phantom(const Disk& omega, std::uint64_t seed, int count, double max_amplitude) {
  std::mt19937_64 rng(seed);
  PhantomSpec spec;
  for (int i = 0; i < count; ++i) {
    Bump b;
    b.radius = omega.radius * (0.3 + 0.25 * uniform(rng));
    b.taper = b.radius;
    b.amplitude = max_amplitude * (0.2 + 0.8 * (1.0 - uniform(rng)));
    const double reach = 0.98 * (omega.radius - b.radius);
    const double r = reach * std::sqrt(uniform(rng));
    const double a = kTwoPi * uniform(rng);
    b.center = {omega.center.x + r * std::cos(a), omega.center.y + r * std::sin(a)};
    spec.bumps.push_back(b);
  }
  return spec;
}

}  // namespace rotopat
