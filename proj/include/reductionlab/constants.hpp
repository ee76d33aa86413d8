#pragma once

#include <numbers>

namespace reductionlab {

// CODATA 2018 values. xi scales every gravitational self-energy difference
// and is kept explicit so that sweeps over it stay cheap.
struct PhysicalConstants {
  double G = 6.67430e-11;                  // m^3 kg^-1 s^-2
  double hbar = 1.054571817e-34;           // J s
  double k_boltzmann = 1.380649e-23;       // J/K
  double c_light = 299792458.0;            // m/s
  double xi = 1.0;                         // dimensionless
  double electron_mass = 9.1093837015e-31; // kg
  double elementary_charge = 1.602176634e-19;    // C
  double vacuum_permittivity = 8.8541878128e-12; // F/m

  double planck() const { return 2.0 * std::numbers::pi * hbar; }

  /// Throws InvalidInput unless every constant is finite and strictly positive.
  void validate() const;
};

}  // namespace reductionlab
