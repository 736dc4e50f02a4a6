#pragma once

#include <random>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/numerics.hpp"
#include "qhj/potential.hpp"
#include "qhj/reduced_action.hpp"
#include "qhj/trajectory.hpp"

namespace qhj::testing {

inline const PhysicalConstants kUnits{};

inline std::vector<double> free_grid(double x_max = 4.0, std::size_t points = 4001) {
  return numerics::uniform_grid(0.0, x_max, points);
}

struct FreeSetup {
  std::vector<double> grid = free_grid();
  PotentialSpec potential = PotentialSpec::free(0.0, 4.0);
  bool rescaled = false;

  BasisFactory factory() const {
    return [g = grid, r = rescaled](double e) { return analytic_free_basis(e, kUnits, g, r); };
  }
  ReducedActionField field(const Microstate& ms) const {
    return build_reduced_action(factory()(ms.energy), ms, potential, kUnits);
  }
  EnergyStencil stencil(const Microstate& ms) const {
    return EnergyStencil::build(factory(), ms, potential, kUnits);
  }
};

// Numerov basis for V = x^2/2 on [-1.2, 1.2] with h = 1e-3; E = 1.2 stays
// above the potential everywhere on the grid.
struct HarmonicSetup {
  std::vector<double> grid = numerics::uniform_grid(-1.2, 1.2, 2401);
  PotentialSpec potential = PotentialSpec::harmonic(1.0, -1.2, 1.2);

  BasisFactory factory() const {
    return [g = grid, v = potential](double e) { return numeric_basis(v, e, kUnits, g); };
  }
  ReducedActionField field(const Microstate& ms) const {
    return build_reduced_action(factory()(ms.energy), ms, potential, kUnits);
  }
  EnergyStencil stencil(const Microstate& ms) const {
    return EnergyStencil::build(factory(), ms, potential, kUnits);
  }
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline TransformCoefficients random_transform(std::mt19937_64& rng, double range = 2.0,
                                              double min_det = 0.2) {
  for (;;) {
    TransformCoefficients t{uniform(rng, -range, range), uniform(rng, -range, range),
                            uniform(rng, -range, range), uniform(rng, -range, range)};
    if (std::abs(t.determinant()) >= min_det) return t;
  }
}

}  // namespace qhj::testing
