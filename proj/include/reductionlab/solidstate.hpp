#pragma once

// Order-of-magnitude estimates for displaced solids, fluid droplets and the
// parasitic mass movements inside a photon detector.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reductionlab/constants.hpp"

namespace reductionlab::solidstate {

struct Material {
  std::string name;
  double nucleus_mass = 0.0;           // kg
  double lattice_constant = 0.0;       // m
  double phonon_velocity = 0.0;        // m/s
  double bulk_density = 0.0;           // kg/m^3
  double thermal_expansion = 0.0;      // 1/K
  double specific_heat = 0.0;          // J/(kg K)
  double compression_modulus = 0.0;    // N/m^2
  double relative_permittivity = 0.0;  // dimensionless

  /// Throws InvalidInput unless every numeric field is finite and positive.
  void validate() const;
};

Material iron();
Material water();
Material sio2();
Material copper();

/// Built-in preset by name: "iron", "water", "sio2" or "cu".
Material preset(std::string_view name);

/// Phonon-broadened nucleus diameter sqrt(2 k T / m) * (lattice / v).
double nucleus_extension(const Material& mat, double temperature,
                         const PhysicalConstants& consts = {});

/// Single-nucleus self-energy (12/5) G m^2 / d_nucl, carrying xi.
double nucleus_eg(const Material& mat, double temperature, const PhysicalConstants& consts = {});

/// Saturated E_G of a solid displaced by more than d_nucl:
/// N_nucl * (12/5) G m_nucl^2 / d_nucl with N_nucl = mass / m_nucl.
double solid_plateau_eg(double mass, const Material& mat, double temperature,
                        const PhysicalConstants& consts = {});

/// alpha * plateau * (dx / d_nucl)^2, meant for dx << d_nucl (warns otherwise).
double solid_small_displacement_eg(double mass, const Material& mat, double temperature, double dx,
                                   double alpha = 5.0, const PhysicalConstants& consts = {});

/// beta * G * d^3 * rho^2 * dx^2 for a long rod moved along its axis.
double rod_macroscopic_eg(double rod_diameter, double density, double dx, double beta = 5.0,
                          const PhysicalConstants& consts = {});

/// Macroscopic shape for solid_eg_curve. A rod uses beta = 5 unless given;
/// a disc has no default and requires beta.
struct MacroGeometry {
  enum class Kind { rod, disc };
  Kind kind = Kind::rod;
  double diameter = 0.0;  // m
  std::optional<double> beta;

  double resolved_beta() const;
};

struct CurvePoint {
  double dx = 0.0;  // m
  double eg = 0.0;  // J
};

/// E_G against displacement: min(small-displacement law, plateau) plus the
/// macroscopic term beyond d_nucl, shifted so the curve is continuous there.
std::vector<CurvePoint> solid_eg_curve(double mass, const Material& mat, double temperature,
                                       const MacroGeometry& geometry,
                                       const std::vector<double>& dx_samples,
                                       double alpha = 5.0, const PhysicalConstants& consts = {});

/// Displacement at which the macroscopic term equals the plateau.
double macroscopic_crossover(double mass, const Material& mat, double temperature,
                             const MacroGeometry& geometry, const PhysicalConstants& consts = {});

/// hbar / [(12/5) G m^2 / d] for a droplet of the given diameter and density.
/// Infinite when the mass vanishes.
double fluid_sphere_lifetime(double diameter, double density, const PhysicalConstants& consts = {});

struct CapacitorParams {
  double radius = 0.05;     // m
  double plate_gap = 1e-4;  // m
  Material dielectric = sio2();
};

struct ResistorParams {
  double length = 0.1;     // m
  double diameter = 3e-3;  // m
  Material material = copper();
};

struct DetectorParams {
  CapacitorParams capacitor;
  ResistorParams resistor;
  double voltage_from = 36.0;  // V
  double voltage_to = 29.0;    // V
  double piezo_displacement = 1e-8;  // m, stroke of the deliberately shifted mass
  double shifted_mass = 0.1;         // kg
  Material shifted_mass_material = iron();
  double temperature = 300.0;          // K
  double photon_wavelength = 1.3e-6;   // m
  double impetus_time = 1.0;           // s after absorption

  void validate() const;
  double capacitance(const PhysicalConstants& consts = {}) const;
};

enum class Effect { dielectric_compression, electron_transfer, resistor_heating, photon_impetus };

std::string_view effect_name(Effect e);

struct BudgetEntry {
  Effect effect = Effect::dielectric_compression;
  double displacement = 0.0;  // m; for electron transfer the moved mass in kg
  double eg = 0.0;            // J
  double rate = 0.0;          // 1/s
};

/// Decay-rate contributions of a mass-density conserving detector.
std::vector<BudgetEntry> detector_budget(const DetectorParams& p,
                                         const PhysicalConstants& consts = {});

/// E_G of the deliberately shifted mass (the mass-density changing mode).
double changing_detector_eg(const DetectorParams& p, const PhysicalConstants& consts = {});

}  // namespace reductionlab::solidstate
