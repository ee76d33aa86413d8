#include "support.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "reductionlab/diagnostics.hpp"
#include "reductionlab/errors.hpp"
#include "reductionlab/massdist.hpp"

using namespace reductionlab;
using namespace reductionlab::massdist;

namespace {

const PhysicalConstants kConsts{};

// Potential (without -G) of a uniform sphere of mass m and radius a.
double sphere_phi(double m, double a, double r) {
  return r >= a ? m / r : m * (3.0 * a * a - r * r) / (2.0 * a * a * a);
}

// Composite Simpson on [lo, hi] with n (even) panels.
template <class F>
double simpson(F f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Double integral rho1 rho2 / r for two equal uniform spheres at distance D,
// built from shell averages of the closed-form sphere potential.
double sphere_mutual_oracle(double m, double a, double D) {
  const double rho = m / (4.0 / 3.0 * std::numbers::pi * a * a * a);
  auto shell = [&](double s) {
    if (s == 0.0) return sphere_phi(m, a, D);
    if (D == 0.0) return sphere_phi(m, a, s);
    auto g = [&](double r) { return sphere_phi(m, a, r) * r; };
    const double lo = std::abs(D - s);
    const double hi = D + s;
    double v = 0.0;
    if (lo < a && a < hi) {
      v = simpson(g, lo, a, 400) + simpson(g, a, hi, 400);
    } else {
      v = simpson(g, lo, hi, 800);
    }
    return v / (2.0 * s * D);
  };
  return simpson([&](double s) { return 4.0 * std::numbers::pi * s * s * rho * shell(s); }, 0.0,
                 a, 800);
}

GridSampled single_cell(double side, double density, Vec3 origin) {
  GridSampled g;
  g.origin = origin;
  g.cell_size = side;
  g.nx = g.ny = g.nz = 1;
  g.densities = {density};
  return g;
}


}  // namespace

TEST_SUITE("massdist") {
  TEST_CASE("constructors reject invalid geometry") {
    CHECK_THROWS_AS(sphere(-1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(sphere(1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(rod(1.0, 1.0, 0.1, {0, 0, 0}), InvalidInput);
    CHECK_THROWS_AS(sphere(1.0, 1.0, {NAN, 0, 0}), InvalidInput);
    GridSampled g = single_cell(1.0, -1.0, {});
    CHECK_THROWS_AS(MassDistribution{g}, InvalidInput);
    g = single_cell(1.0, 1.0, {});
    g.densities.push_back(2.0);
    CHECK_THROWS_AS(MassDistribution{g}, InvalidInput);
    NucleusLattice overlap{1.0, 1.0, {{0, 0, 0}, {0.5, 0, 0}}};
    CHECK_THROWS_AS(MassDistribution{overlap}, InvalidInput);
  }

  TEST_CASE("total mass and features") {
    CHECK(total_mass(sphere(2.5, 1.0)) == 2.5);
    CHECK(total_mass(rod(3.0, 1.0, 0.01, {1, 0, 0})) == 3.0);
    CHECK(total_mass(MassDistribution{single_cell(0.1, 1000.0, {})}) ==
          rel(1.0));
    CHECK(total_mass(MassDistribution{NucleusLattice{2.0, 0.1, {{0, 0, 0}, {1, 0, 0}}}}) == 4.0);
    CHECK(smallest_feature(rod(3.0, 1.0, 0.01, {1, 0, 0})) == rel(0.01));
    const BoundingBox box = bounding_box(displaced(sphere(1.0, 2.0), {5, 0, 0}));
    CHECK(box.lo.x == rel(4.0));
    CHECK(box.hi.x == rel(6.0));
  }

  TEST_CASE("sphere potential is the closed form inside and outside") {
    const auto s = sphere(10.0, 2.0, {1, 1, 1});
    for (double r : {0.0, 0.3, 0.999, 1.0, 2.0, 50.0}) {
      CAPTURE(r);
      const double phi = potential(s, {1 + r, 1, 1}, kConsts);
      CHECK(phi == rel(-kConsts.G * sphere_phi(10.0, 1.0, r), 1e-13));
    }
  }

  TEST_CASE("rod and grid potentials approach the point-mass limit") {
    const auto r = rod(5.0, 0.1, 0.01, {0, 0, 1});
    CHECK(potential(r, {10, 0, 0}, kConsts) ==
          rel(-kConsts.G * 5.0 / 10.0, 1e-4));
    const auto g = MassDistribution{single_cell(0.2, 1000.0, {-0.1, -0.1, -0.1})};
    CHECK(potential(g, {0, 0, 30}, kConsts) ==
          rel(-kConsts.G * 8.0 / 30.0, 1e-5));
  }

  TEST_CASE("sphere_pair_eg limits") {
    const double m = 2.0;
    const double d = 0.1;
    const double gm2 = kConsts.G * m * m;
    CHECK(sphere_pair_eg(m, d, 0.0) == 0.0);
    CHECK(sphere_pair_eg(m, d, INFINITY) == rel(24.0 / 5.0 * gm2 / d, 1e-14));
    for (double D : {0.1, 0.2, 1.0}) {
      CHECK(sphere_pair_eg(m, d, D) ==
            rel(24.0 / 5.0 * gm2 / d - 2.0 * gm2 / D, 1e-13));
    }
    CHECK(sphere_pair_eg(m, d, 1e-4) > 0.0);
  }

  TEST_CASE("sphere_pair_eg matches shell-integration oracle when overlapping") {
    const double m = 1.0;
    const double d = 2.0;
    const double self = sphere_mutual_oracle(m, 1.0, 0.0);
    CHECK(self == rel(12.0 / 5.0 * m * m / d, 1e-6));
    for (double D : {0.05, 0.3, 1.0, 1.7}) {
      CAPTURE(D);
      const double oracle = kConsts.G * 2.0 * (self - sphere_mutual_oracle(m, 1.0, D));
      CHECK(sphere_pair_eg(m, d, D) == rel(oracle, 1e-5));
    }
  }

  TEST_CASE("lattice quadrature for spheres converges to the closed form") {
    const auto a = sphere(1.0, 1.0);
    for (double D : {0.2, 1.0, 10.0}) {
      CAPTURE(D);
      const auto b = sphere(1.0, 1.0, {0, D, 0});
      CHECK(pair_eg(a, b) == rel(sphere_pair_eg(1.0, 1.0, D), 1e-3));
    }
  }

  TEST_CASE("pair_eg of two unit cells matches the tabulated cube constants") {
    const double side = 1e-3;
    const double rho = 2000.0;
    const auto a = MassDistribution{single_cell(side, rho, {})};
    const auto b = MassDistribution{single_cell(side, rho, {side, 0, 0})};
    const double scale = kConsts.G * rho * rho * std::pow(side, 5);
    const double oracle = scale * 2.0 * (1.8823126443896601601 - 0.980885183601);
    CHECK(pair_eg(a, b) == rel(oracle, 1e-3));
  }

  TEST_CASE("pair_eg is symmetric and vanishes for equal inputs") {
    const auto r1 = rod(1.0, 0.02, 0.01, {0, 0, 1});
    const auto r2 = rod(1.0, 0.02, 0.01, {0, 0, 1}, {0, 0, 0.004});
    CHECK(pair_eg(r1, r1) == 0.0);
    CHECK(pair_eg(r1, r2) == pair_eg(r2, r1));
    CHECK(pair_eg(r1, r2) > 0.0);
  }

  TEST_CASE("E_G grows with xi linearly") {
    PhysicalConstants c2;
    c2.xi = 3.0;
    CHECK(sphere_pair_eg(1.0, 1.0, 0.5, c2) ==
          rel(3.0 * sphere_pair_eg(1.0, 1.0, 0.5), 1e-14));
  }

  TEST_CASE("a single smeared nucleus displaced behaves like a sphere") {
    const NucleusLattice one{1e-25, 1e-11, {{0, 0, 0}}};
    const auto a = MassDistribution{one};
    const auto b = displaced(a, {1e-10, 0, 0});
    CHECK(pair_eg(a, b) == rel(sphere_pair_eg(1e-25, 1e-11, 1e-10), 1e-3));
  }

  TEST_CASE("fuzziness pair sums to E_G") {
    const auto a = sphere(1.0, 1.0);
    const auto b = sphere(1.0, 1.0, {0.7, 0, 0});
    const FuzzinessPair f = energy_fuzziness_pair(a, b);
    CHECK(f.state1 == rel(f.state2, 1e-12));
    CHECK(f.sum() == rel(sphere_pair_eg(1.0, 1.0, 0.7), 1e-12));

    const auto r1 = rod(1.0, 0.02, 0.01, {0, 0, 1});
    const auto r2 = rod(1.0, 0.02, 0.01, {0, 0, 1}, {0.006, 0, 0});
    QuadratureConfig cfg;
    cfg.grid_resolution = 8;
    cfg.rel_tolerance = 1e-2;
    CHECK(energy_fuzziness_pair(r1, r2, cfg).sum() == rel(pair_eg(r1, r2, cfg), 2e-2));
  }

  TEST_CASE("interaction matrix reproduces pairwise E_G") {
    std::vector<MassDistribution> ds{sphere(1.0, 1.0), sphere(1.0, 1.0, {0.4, 0, 0}),
                                     sphere(1.0, 1.0, {3, 0, 0})};
    const auto w = interaction_matrix(ds);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(w[i * 3 + j] == w[j * 3 + i]);
        const double eg = w[i * 3 + i] + w[j * 3 + j] - 2.0 * w[i * 3 + j];
        if (i == j) {
          CHECK(eg == 0.0);
        } else {
          const double D = std::abs(ds[i].as<UniformSphere>()->center.x -
                                    ds[j].as<UniformSphere>()->center.x);
          CHECK(eg == rel(sphere_pair_eg(1.0, 1.0, D), 1e-12));
        }
      }
    }
  }

  TEST_CASE("time dilation is below one near mass") {
    const auto s = sphere(5.97e24, 1.2742e7);
    const double f = time_dilation_factor(s, {6.371e6, 0, 0});
    CHECK(f < 1.0);
    CHECK(1.0 - f == rel(6.96e-10, 1e-2));
  }

  TEST_CASE("mean distribution conserves mass and honours the cell budget") {
    std::vector<MassDistribution> ds{sphere(1.0, 1.0), sphere(1.0, 1.0, {0.5, 0, 0})};
    std::vector<double> w{0.25, 0.75};
    const GridSampled g = mean_distribution(ds, w, 16);
    double mass = 0.0;
    for (double rho : g.densities) mass += rho * g.cell_volume();
    CHECK(mass == rel(1.0, 1e-2));
    CHECK(g.cell_size <= 1.0 / 16.0 + 1e-12);
    CHECK_THROWS_AS(mean_distribution(ds, w, 16, 100), RasterizationExtentError);
    std::vector<double> bad{0.5};
    CHECK_THROWS_AS(mean_distribution(ds, bad), InvalidInput);
  }

  TEST_CASE("refinement that cannot meet the tolerance raises ConvergenceError") {
    const auto r1 = rod(1.0, 0.05, 0.01, {0, 0, 1});
    const auto r2 = rod(1.0, 0.05, 0.01, {0, 0, 1}, {0.002, 0, 0});
    QuadratureConfig cfg;
    cfg.rel_tolerance = 1e-12;
    cfg.max_refinements = 1;
    cfg.grid_resolution = 4;
    try {
      (void)pair_eg(r1, r2, cfg);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.last_estimate() != e.previous_estimate());
    }
  }

  TEST_CASE("both singularity schemes converge to the same value") {
    const auto r1 = rod(1.0, 0.02, 0.01, {0, 0, 1});
    const auto r2 = rod(1.0, 0.02, 0.01, {0, 0, 1}, {0.005, 0, 0});
    QuadratureConfig a;
    a.grid_resolution = 8;
    a.rel_tolerance = 1e-2;
    QuadratureConfig b = a;
    b.singularity_scheme = SingularityScheme::offset_midpoint;
    CHECK(pair_eg(r1, r2, a) == rel(pair_eg(r1, r2, b), 1e-2));
  }

  TEST_CASE("unequal masses warn") {
    int warnings = 0;
    const WarningHandler prev = set_warning_handler([&](std::string_view) { ++warnings; });
    (void)pair_eg(sphere(1.0, 1.0), sphere(2.0, 1.0, {3, 0, 0}));
    set_warning_handler(prev);
    CHECK(warnings == 1);
  }
}
