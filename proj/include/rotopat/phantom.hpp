#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rotopat/geometry.hpp"
#include "rotopat/optics.hpp"

namespace rotopat {

/// a * cosine_taper(|x - center|, radius, taper): flat top of radius
/// radius - taper, C^1 roll-off to zero at `radius`.
struct Bump {
  Point center{};
  double radius = 0.1;
  double amplitude = 1.0;
  double taper = 0.1;

  double operator()(Point x) const { return amplitude * cosine_taper(norm(x - center), radius, taper); }
  /// Largest gradient magnitude, a * pi / (2 taper).
  double max_gradient() const;
};

struct PhantomSpec {
  std::vector<Bump> bumps;
  /// A wide flat-topped bump added on top (same parametrization).
  std::optional<Bump> plateau;
};

struct Phantom {
  AbsorptionMap sigma;
  /// Discrete W^{1,inf} norm of sigma.
  double w1inf = 0.0;
  double poincare = 0.0;
  /// C_Omega * ||sigma||_{W^{1,inf}}.
  double smallness = 0.0;
};

/// Sums the bumps on the mask grid. Throws GeometryError when a bump is not
/// strictly inside Omega or has a nonpositive radius/taper or a negative
/// amplitude. `poincare` < 0 computes C_Omega from the mask.
Phantom generate_phantom(const PhantomSpec& spec, std::shared_ptr<const DomainMask> mask, double poincare = -1.0);

/// Reproducible random spec of `count` bumps inside `omega` with amplitudes in
/// (0.2, 1] * max_amplitude and radii between 0.3 and 0.55 of omega's radius.
PhantomSpec random_phantom(const Disk& omega, std::uint64_t seed, int count = 2, double max_amplitude = 0.3);

}  // namespace rotopat
