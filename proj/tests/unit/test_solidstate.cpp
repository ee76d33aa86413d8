#include <cmath>
#include <numbers>
#include <vector>

#include "reductionlab/diagnostics.hpp"
#include "reductionlab/errors.hpp"
#include "reductionlab/massdist.hpp"
#include "reductionlab/solidstate.hpp"
#include "support.hpp"

using namespace reductionlab;
using namespace reductionlab::solidstate;

namespace {

const PhysicalConstants kConsts{};

// Independent plug-ins of the closed forms.
double d_nucl_oracle(const Material& m, double t) {
  return std::sqrt(2.0 * kConsts.k_boltzmann * t / m.nucleus_mass) * m.lattice_constant /
         m.phonon_velocity;
}

double plateau_oracle(double mass, const Material& m, double t) {
  const double n = mass / m.nucleus_mass;
  return n * 2.4 * kConsts.G * m.nucleus_mass * m.nucleus_mass / d_nucl_oracle(m, t);
}

MacroGeometry rod_1cm() {
  MacroGeometry g;
  g.kind = MacroGeometry::Kind::rod;
  g.diameter = 0.01;
  return g;
}

}  // namespace

TEST_SUITE("solidstate") {
  TEST_CASE("presets are valid and addressable by name") {
    for (const char* name : {"iron", "water", "sio2", "cu"}) {
      CAPTURE(name);
      const Material m = preset(name);
      CHECK(m.name == name);
      CHECK_NOTHROW(m.validate());
    }
    CHECK(iron().nucleus_mass == 9.3e-26);
    CHECK(iron().lattice_constant == 2.87e-10);
    CHECK(iron().bulk_density == 7874.0);
    CHECK(water().bulk_density == 1000.0);
    CHECK(sio2().relative_permittivity == 3.7);
    CHECK(copper().thermal_expansion == 1.7e-5);
    CHECK_THROWS_AS(preset("gold"), InvalidInput);
    Material bad = iron();
    bad.phonon_velocity = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
  }

  TEST_CASE("nucleus extension") {
    const double d = nucleus_extension(iron(), 300.0);
    CHECK(d == rel(d_nucl_oracle(iron(), 300.0), 1e-14));
    CHECK(d > 0.1e-10);
    CHECK(d < 0.4e-10);
    CHECK(nucleus_extension(iron(), 0.0) == 0.0);
    CHECK(nucleus_extension(iron(), 1200.0) == rel(2.0 * d, 1e-14));
    CHECK_THROWS_AS(nucleus_extension(iron(), -1.0), InvalidInput);
  }

  TEST_CASE("nucleus self-energy and plateau") {
    const double d = nucleus_extension(iron(), 300.0);
    CHECK(nucleus_eg(iron(), 300.0) ==
          rel(2.4 * kConsts.G * std::pow(iron().nucleus_mass, 2) / d, 1e-14));
    const double plateau = solid_plateau_eg(0.1, iron(), 300.0);
    CHECK(plateau == rel(plateau_oracle(0.1, iron(), 300.0), 1e-13));
    const double log_rate = std::log10(plateau / kConsts.hbar);
    CHECK(log_rate >= 8.5);
    CHECK(log_rate <= 9.5);
    CHECK(solid_plateau_eg(0.2, iron(), 300.0) == rel(2.0 * plateau, 1e-14));
    Material light = iron();
    light.nucleus_mass *= 1e-6;
    CHECK(solid_plateau_eg(0.1, light, 300.0) < 1e-2 * plateau);
  }

  TEST_CASE("small displacement law") {
    const double d = nucleus_extension(iron(), 300.0);
    const double plateau = solid_plateau_eg(0.1, iron(), 300.0);
    CHECK(solid_small_displacement_eg(0.1, iron(), 300.0, 0.0) == 0.0);
    CHECK(solid_small_displacement_eg(0.1, iron(), 300.0, d / 10.0) == rel(plateau * 0.05, 1e-13));
    const double a = solid_small_displacement_eg(0.1, iron(), 300.0, d / 40.0);
    const double b = solid_small_displacement_eg(0.1, iron(), 300.0, d / 20.0);
    CHECK(b == rel(4.0 * a, 1e-13));

    int warnings = 0;
    const WarningHandler prev = set_warning_handler([&](std::string_view) { ++warnings; });
    (void)solid_small_displacement_eg(0.1, iron(), 300.0, 3.0 * d);
    set_warning_handler(prev);
    CHECK(warnings == 1);
  }

  TEST_CASE("quadratic law agrees with nuclei displaced by quadrature within a factor 2") {
    // Exact smeared-sphere energies for a small cubic block of nuclei, scaled
    // per nucleus and compared with the alpha = 5 law.
    const Material fe = iron();
    const double d = nucleus_extension(fe, 300.0);
    massdist::NucleusLattice block{fe.nucleus_mass, d, {}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          block.positions.push_back({i * fe.lattice_constant, j * fe.lattice_constant,
                                     k * fe.lattice_constant});
        }
      }
    }
    const massdist::MassDistribution a{block};
    const massdist::MassDistribution b = massdist::displaced(a, {d / 20.0, 0, 0});
    const std::vector<massdist::MassDistribution> pair{a, b};
    const auto w = massdist::interaction_matrix(pair);
    const double quadrature = w[0] + w[3] - 2.0 * w[1];
    const double law = solid_small_displacement_eg(8.0 * fe.nucleus_mass, fe, 300.0, d / 20.0);
    CHECK(quadrature / law > 0.5);
    CHECK(quadrature / law < 2.0);
  }

  TEST_CASE("macroscopic rod term") {
    const double e = rod_macroscopic_eg(0.01, 7874.0, 1e-9);
    CHECK(e == rel(5.0 * kConsts.G * 1e-6 * 7874.0 * 7874.0 * 1e-18, 1e-14));
    CHECK(rod_macroscopic_eg(0.01, 7874.0, 0.0) == 0.0);
    CHECK(rod_macroscopic_eg(0.01, 7874.0, 2e-9) == rel(4.0 * e, 1e-14));
    CHECK(rod_macroscopic_eg(0.02, 7874.0, 1e-9) == rel(8.0 * e, 1e-14));
    CHECK(rod_macroscopic_eg(0.01, 2.0 * 7874.0, 1e-9) == rel(4.0 * e, 1e-14));
    // A 1 cm iron rod moved by 20 Angstrom decays about as fast as the plateau.
    const double ratio = rod_macroscopic_eg(0.01, 7874.0, 20e-10) / solid_plateau_eg(0.1, iron(), 300.0);
    CHECK(ratio > 1.0 / 3.0);
    CHECK(ratio < 3.0);
  }

  TEST_CASE("crossover of the macroscopic term") {
    const double x = macroscopic_crossover(0.1, iron(), 300.0, rod_1cm());
    CHECK(x > 10e-10);
    CHECK(x < 40e-10);
    CHECK(rod_macroscopic_eg(0.01, 7874.0, x) == rel(solid_plateau_eg(0.1, iron(), 300.0), 1e-10));
    MacroGeometry disc;
    disc.kind = MacroGeometry::Kind::disc;
    disc.diameter = 0.01;
    CHECK_THROWS_AS(macroscopic_crossover(0.1, iron(), 300.0, disc), InvalidInput);
    disc.beta = 0.5;
    CHECK(macroscopic_crossover(0.1, iron(), 300.0, disc) ==
          rel(x * std::sqrt(10.0), 1e-12));
  }

  TEST_CASE("E_G curve is monotone, continuous and saturates") {
    const double d = nucleus_extension(iron(), 300.0);
    std::vector<double> xs;
    for (int k = 0; k <= 400; ++k) xs.push_back(d * std::pow(10.0, -3.0 + 6.0 * k / 400.0));
    xs.insert(xs.begin(), 0.0);
    const auto curve = solid_eg_curve(0.1, iron(), 300.0, rod_1cm(), xs);
    REQUIRE(curve.size() == xs.size());
    CHECK(curve.front().eg == 0.0);
    for (std::size_t k = 1; k < curve.size(); ++k) {
      CHECK(curve[k].dx == xs[k]);
      CHECK(curve[k].eg >= curve[k - 1].eg);
    }
    // Continuity across d_nucl and across the plateau cap.
    const std::vector<double> seam{d / std::sqrt(5.0) * (1 - 1e-9), d / std::sqrt(5.0) * (1 + 1e-9),
                                   d * (1 - 1e-9), d * (1 + 1e-9)};
    const auto s = solid_eg_curve(0.1, iron(), 300.0, rod_1cm(), seam);
    CHECK(s[1].eg == rel(s[0].eg, 1e-6));
    CHECK(s[3].eg == rel(s[2].eg, 1e-6));
    // Between the cap and the point where the macroscopic term matters the
    // curve sits on the plateau.
    const double plateau = solid_plateau_eg(0.1, iron(), 300.0);
    const auto flat = solid_eg_curve(0.1, iron(), 300.0, rod_1cm(), {2.0 * d});
    CHECK(flat[0].eg == rel(plateau, 1e-2));
    const std::vector<double> unsorted{2e-10, 1e-10};
    CHECK_THROWS_AS(solid_eg_curve(0.1, iron(), 300.0, rod_1cm(), unsorted), InvalidInput);
  }

  TEST_CASE("fluid sphere lifetime") {
    const double tau = fluid_sphere_lifetime(1e-6, 1000.0);
    const double m = std::numbers::pi / 6.0 * 1e-18 * 1000.0;
    CHECK(tau == rel(kConsts.hbar / (2.4 * kConsts.G * m * m / 1e-6), 1e-13));
    CHECK(tau >= 0.1);
    CHECK(tau <= 10.0);
    CHECK(fluid_sphere_lifetime(0.5e-6, 1000.0) == rel(32.0 * tau, 1e-13));
    CHECK(std::isinf(fluid_sphere_lifetime(1e-6, 0.0)));
  }

  TEST_CASE("default detector fixture") {
    const DetectorParams p;
    CHECK(p.capacitance() == rel(2.6e-9, 0.05));
    const auto budget = detector_budget(p);
    REQUIRE(budget.size() == 4);
    auto entry = [&](Effect e) {
      for (const auto& b : budget) {
        if (b.effect == e) return b;
      }
      FAIL("missing entry");
      return BudgetEntry{};
    };
    const auto comp = entry(Effect::dielectric_compression);
    const auto elec = entry(Effect::electron_transfer);
    const auto res = entry(Effect::resistor_heating);
    const auto imp = entry(Effect::photon_impetus);
    CHECK(std::abs(std::log10(comp.displacement / 2e-15)) <= 2.0);
    CHECK(std::abs(std::log10(comp.rate / 1e-1)) <= 2.0);
    CHECK(std::abs(std::log10(res.displacement / 4e-13)) <= 2.0);
    CHECK(std::abs(std::log10(res.rate / 1e5)) <= 2.0);
    CHECK(imp.rate < elec.rate);
    CHECK(elec.rate < comp.rate);
    CHECK(comp.rate < res.rate);
    for (const auto& b : budget) CHECK(b.rate == rel(b.eg / kConsts.hbar, 1e-14));
  }

  TEST_CASE("budget entries follow their closed forms") {
    const DetectorParams p;
    const auto budget = detector_budget(p);
    const double area = std::numbers::pi * 0.05 * 0.05;
    const double c = 3.7 * kConsts.vacuum_permittivity * area / 1e-4;
    CHECK(p.capacitance() == rel(c, 1e-14));
    const double dm = c * 7.0 / kConsts.elementary_charge * kConsts.electron_mass;
    CHECK(budget[1].displacement == rel(dm, 1e-13));
    CHECK(budget[1].eg == rel(kConsts.G * 4.0 * std::numbers::pi * dm * dm * 1e-4 / area, 1e-13));
    const double heat = 0.5 * c * (36.0 * 36.0 - 29.0 * 29.0);
    const double wire = std::numbers::pi * 0.25 * 9e-6 * 0.1 * 8960.0;
    CHECK(budget[2].displacement == rel(1.7e-5 * heat / (wire * 385.0) * 0.1, 1e-13));
    const double v = kConsts.planck() / (1.3e-6 * 0.1);
    CHECK(budget[3].displacement == rel(v, 1e-13));
  }

  TEST_CASE("zero voltage drop gives zero electrical entries") {
    DetectorParams p;
    p.voltage_to = p.voltage_from;
    const auto budget = detector_budget(p);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(budget[k].displacement == 0.0);
      CHECK(budget[k].eg == 0.0);
    }
    CHECK(budget[3].eg > 0.0);
    p.voltage_to = p.voltage_from + 1.0;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
  }

  TEST_CASE("mass-density changing detector") {
    const DetectorParams p;
    const double e = changing_detector_eg(p);
    CHECK(e > 0.0);
    CHECK(e <= solid_plateau_eg(0.1, iron(), 300.0));
    CHECK(e / kConsts.hbar > detector_budget(p)[2].rate);
  }
}
