#include "reductionlab/solidstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reductionlab/diagnostics.hpp"
#include "reductionlab/errors.hpp"

namespace reductionlab::solidstate {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

// Small-displacement law without the regime warning.
double quadratic_eg(double mass, const Material& mat, double temperature, double dx, double alpha,
                    const PhysicalConstants& consts) {
  const double d = nucleus_extension(mat, temperature, consts);
  if (dx == 0.0) return 0.0;
  const double ratio = dx / d;
  return alpha * solid_plateau_eg(mass, mat, temperature, consts) * ratio * ratio;
}

}  // namespace

void Material::validate() const {
  require(positive(nucleus_mass) && positive(lattice_constant) && positive(phonon_velocity) &&
              positive(bulk_density) && positive(thermal_expansion) && positive(specific_heat) &&
              positive(compression_modulus) && positive(relative_permittivity),
          "material '" + name + "': every field must be finite and > 0");
}

Material iron() {
  return {"iron", 9.3e-26, 2.87e-10, 5.0e3, 7874.0, 1.2e-5, 449.0, 1.7e11, 1.0};
}

Material water() {
  // Mean nuclear mass of H2O (18 u over three nuclei).
  return {"water", 9.97e-27, 3.1e-10, 1480.0, 1000.0, 6.9e-5, 4186.0, 2.2e9, 80.0};
}

Material sio2() {
  // Mean nuclear mass of SiO2 (60 u over three nuclei).
  return {"sio2", 3.32e-26, 4.91e-10, 5.9e3, 2200.0, 5.5e-7, 740.0, 7.6e10, 3.7};
}

Material copper() {
  return {"cu", 1.055e-25, 3.61e-10, 4.7e3, 8960.0, 1.7e-5, 385.0, 1.4e11, 1.0};
}

Material preset(std::string_view name) {
  if (name == "iron") return iron();
  if (name == "water") return water();
  if (name == "sio2") return sio2();
  if (name == "cu") return copper();
  throw InvalidInput("unknown material preset '" + std::string(name) + "'");
}

double nucleus_extension(const Material& mat, double temperature, const PhysicalConstants& consts) {
  mat.validate();
  require(non_negative(temperature), "temperature must be >= 0");
  return std::sqrt(2.0 * consts.k_boltzmann * temperature / mat.nucleus_mass) *
         (mat.lattice_constant / mat.phonon_velocity);
}

double nucleus_eg(const Material& mat, double temperature, const PhysicalConstants& consts) {
  const double d = nucleus_extension(mat, temperature, consts);
  require(d > 0.0, "nucleus extension vanishes at T = 0; E_G of a point nucleus is undefined");
  return consts.xi * 12.0 / 5.0 * consts.G * mat.nucleus_mass * mat.nucleus_mass / d;
}

double solid_plateau_eg(double mass, const Material& mat, double temperature,
                        const PhysicalConstants& consts) {
  require(positive(mass), "solid mass must be > 0");
  const double n_nucl = mass / mat.nucleus_mass;
  return n_nucl * nucleus_eg(mat, temperature, consts);
}

double solid_small_displacement_eg(double mass, const Material& mat, double temperature, double dx,
                                   double alpha, const PhysicalConstants& consts) {
  require(non_negative(dx), "displacement must be >= 0");
  require(positive(alpha), "alpha must be > 0");
  const double d = nucleus_extension(mat, temperature, consts);
  if (dx > 0.3 * d) {
    warn("solid_small_displacement_eg: displacement is not small compared to d_nucl");
  }
  return quadratic_eg(mass, mat, temperature, dx, alpha, consts);
}

double rod_macroscopic_eg(double rod_diameter, double density, double dx, double beta,
                          const PhysicalConstants& consts) {
  require(positive(rod_diameter), "rod diameter must be > 0");
  require(non_negative(density), "density must be >= 0");
  require(non_negative(dx), "displacement must be >= 0");
  require(positive(beta), "beta must be > 0");
  return consts.xi * beta * consts.G * rod_diameter * rod_diameter * rod_diameter * density *
         density * dx * dx;
}

double MacroGeometry::resolved_beta() const {
  if (beta) {
    require(positive(*beta), "beta must be > 0");
    return *beta;
  }
  require(kind == Kind::rod, "a disc geometry has no default beta; supply one");
  return 5.0;
}

std::vector<CurvePoint> solid_eg_curve(double mass, const Material& mat, double temperature,
                                       const MacroGeometry& geometry,
                                       const std::vector<double>& dx_samples, double alpha,
                                       const PhysicalConstants& consts) {
  require(std::is_sorted(dx_samples.begin(), dx_samples.end()), "dx samples must be ascending");
  const double d = nucleus_extension(mat, temperature, consts);
  const double plateau = solid_plateau_eg(mass, mat, temperature, consts);
  const double beta = geometry.resolved_beta();
  const double macro_seam = rod_macroscopic_eg(geometry.diameter, mat.bulk_density, d, beta, consts);
  std::vector<CurvePoint> out;
  out.reserve(dx_samples.size());
  for (double dx : dx_samples) {
    require(non_negative(dx), "dx samples must be >= 0");
    double eg = std::min(quadratic_eg(mass, mat, temperature, dx, alpha, consts), plateau);
    if (dx > d) {
      eg += rod_macroscopic_eg(geometry.diameter, mat.bulk_density, dx, beta, consts) - macro_seam;
    }
    out.push_back({dx, eg});
  }
  return out;
}

double macroscopic_crossover(double mass, const Material& mat, double temperature,
                             const MacroGeometry& geometry, const PhysicalConstants& consts) {
  const double plateau = solid_plateau_eg(mass, mat, temperature, consts);
  const double unit = rod_macroscopic_eg(geometry.diameter, mat.bulk_density, 1.0,
                                         geometry.resolved_beta(), consts);
  return std::sqrt(plateau / unit);
}

double fluid_sphere_lifetime(double diameter, double density, const PhysicalConstants& consts) {
  require(positive(diameter), "diameter must be > 0");
  require(non_negative(density), "density must be >= 0");
  const double m = std::numbers::pi / 6.0 * diameter * diameter * diameter * density;
  const double eg = consts.xi * 12.0 / 5.0 * consts.G * m * m / diameter;
  if (eg == 0.0) return std::numeric_limits<double>::infinity();
  return consts.hbar / eg;
}

void DetectorParams::validate() const {
  require(positive(capacitor.radius) && positive(capacitor.plate_gap),
          "capacitor radius and plate gap must be > 0");
  require(positive(resistor.length) && positive(resistor.diameter),
          "resistor length and diameter must be > 0");
  capacitor.dielectric.validate();
  resistor.material.validate();
  shifted_mass_material.validate();
  require(non_negative(voltage_to) && std::isfinite(voltage_from) && voltage_from >= voltage_to,
          "voltage drop must go from a higher to a lower non-negative voltage");
  require(non_negative(piezo_displacement), "piezo displacement must be >= 0");
  require(positive(shifted_mass), "shifted mass must be > 0");
  require(positive(temperature), "temperature must be > 0");
  require(positive(photon_wavelength), "photon wavelength must be > 0");
  require(non_negative(impetus_time), "impetus time must be >= 0");
}

double DetectorParams::capacitance(const PhysicalConstants& consts) const {
  const double area = std::numbers::pi * capacitor.radius * capacitor.radius;
  return capacitor.dielectric.relative_permittivity * consts.vacuum_permittivity * area /
         capacitor.plate_gap;
}

std::string_view effect_name(Effect e) {
  switch (e) {
    case Effect::dielectric_compression:
      return "dielectric_compression";
    case Effect::electron_transfer:
      return "electron_transfer";
    case Effect::resistor_heating:
      return "resistor_heating";
    case Effect::photon_impetus:
      return "photon_impetus";
  }
  return "unknown";
}

std::vector<BudgetEntry> detector_budget(const DetectorParams& p, const PhysicalConstants& consts) {
  p.validate();
  consts.validate();
  const double area = std::numbers::pi * p.capacitor.radius * p.capacitor.radius;
  const double gap = p.capacitor.plate_gap;
  const double v1 = p.voltage_from;
  const double v2 = p.voltage_to;
  const double c = p.capacitance(consts);
  const Material& diel = p.capacitor.dielectric;
  std::vector<BudgetEntry> out;

  // Electrostatic pressure eps eps0 V^2 / (2 gap^2) relaxes; the slab
  // springs back by gap * dp / modulus.
  {
    const double dp = diel.relative_permittivity * consts.vacuum_permittivity * (v1 * v1 - v2 * v2) /
                      (2.0 * gap * gap);
    const double dd = gap * dp / diel.compression_modulus;
    const double slab_mass = area * gap * diel.bulk_density;
    const double eg = quadratic_eg(slab_mass, diel, p.temperature, dd, 5.0, consts);
    out.push_back({Effect::dielectric_compression, dd, eg, eg / consts.hbar});
  }

  // Electrons moved across the gap form two opposite surface layers:
  // integral rho rho / r = 4 pi dm^2 gap / A.
  {
    const double dm = c * (v1 - v2) / consts.elementary_charge * consts.electron_mass;
    const double eg = consts.xi * consts.G * 4.0 * std::numbers::pi * dm * dm * gap / area;
    out.push_back({Effect::electron_transfer, dm, eg, eg / consts.hbar});
  }

  // The discharged energy heats the wire, which lengthens.
  {
    const ResistorParams& r = p.resistor;
    const double heat = 0.5 * c * (v1 * v1 - v2 * v2);
    const double wire_mass =
        std::numbers::pi * 0.25 * r.diameter * r.diameter * r.length * r.material.bulk_density;
    const double dt = heat / (wire_mass * r.material.specific_heat);
    const double dl = r.material.thermal_expansion * dt * r.length;
    const double eg = quadratic_eg(wire_mass, r.material, p.temperature, dl, 5.0, consts);
    out.push_back({Effect::resistor_heating, dl, eg, eg / consts.hbar});
  }

  // Absorbed photon momentum h / lambda sets the shifted mass drifting.
  {
    const double v = consts.planck() / (p.photon_wavelength * p.shifted_mass);
    const double dx = v * p.impetus_time;
    const double eg =
        quadratic_eg(p.shifted_mass, p.shifted_mass_material, p.temperature, dx, 5.0, consts);
    out.push_back({Effect::photon_impetus, dx, eg, eg / consts.hbar});
  }
  return out;
}

double changing_detector_eg(const DetectorParams& p, const PhysicalConstants& consts) {
  p.validate();
  const double plateau = solid_plateau_eg(p.shifted_mass, p.shifted_mass_material, p.temperature,
                                          consts);
  const double quad = quadratic_eg(p.shifted_mass, p.shifted_mass_material, p.temperature,
                                   p.piezo_displacement, 5.0, consts);
  return std::min(quad, plateau);
}

}  // namespace reductionlab::solidstate
