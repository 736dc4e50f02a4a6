#pragma once

#include <cmath>

#include "qhj/errors.hpp"

namespace qhj {

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) {
      throw PreconditionError("hbar must be positive and finite");
    }
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw PreconditionError("mass must be positive and finite");
    }
  }
};

// k = sqrt(2 m E) / hbar for E >= 0.
inline double wavenumber(double energy, const PhysicalConstants& c) {
  return std::sqrt(2.0 * c.mass * energy) / c.hbar;
}

// Inverse of wavenumber().
inline double energy_from_wavenumber(double k, const PhysicalConstants& c) {
  return c.hbar * c.hbar * k * k / (2.0 * c.mass);
}

// dk/dE = m / (hbar^2 k).
inline double dk_denergy(double k, const PhysicalConstants& c) {
  return c.mass / (c.hbar * c.hbar * k);
}

}  // namespace qhj
