#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "reductionlab/constants.hpp"
#include "reductionlab/vec3.hpp"

namespace reductionlab::massdist {

struct UniformSphere {
  double mass = 0.0;      // kg
  double diameter = 0.0;  // m
  Vec3 center;
};

struct UniformRod {
  double mass = 0.0;
  double length = 0.0;
  double diameter = 0.0;
  Vec3 axis{0.0, 0.0, 1.0};  // normalised on construction
  Vec3 center;
};

/// Point-like nuclei smeared into uniform spheres of diameter nucleus_diameter.
struct NucleusLattice {
  double nucleus_mass = 0.0;
  double nucleus_diameter = 0.0;
  std::vector<Vec3> positions;
};

/// Piecewise-constant density on an axis-aligned cubic grid. Cell (i, j, k)
/// spans origin + cell_size * [i, i+1) x [j, j+1) x [k, k+1); densities are
/// stored with k fastest.
struct GridSampled {
  Vec3 origin;
  double cell_size = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;
  std::vector<double> densities;  // kg/m^3

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return densities[(i * ny + j) * nz + k];
  }
  double cell_volume() const { return cell_size * cell_size * cell_size; }
};

class MassDistribution;

/// The base field rigidly shifted by offset.
struct Displaced {
  std::shared_ptr<const MassDistribution> base;
  Vec3 offset;
};

/// Immutable classical mass-density field. Every constructor validates its
/// invariants and throws InvalidInput on violation.
class MassDistribution {
 public:
  using Variant = std::variant<UniformSphere, UniformRod, NucleusLattice, GridSampled, Displaced>;

  explicit MassDistribution(UniformSphere s);
  explicit MassDistribution(UniformRod r);
  explicit MassDistribution(NucleusLattice l);
  explicit MassDistribution(GridSampled g);
  explicit MassDistribution(Displaced d);

  const Variant& get() const { return value_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&value_);
  }

 private:
  Variant value_;
};

MassDistribution sphere(double mass, double diameter, Vec3 center = {});
MassDistribution rod(double mass, double length, double diameter, Vec3 axis, Vec3 center = {});
MassDistribution displaced(const MassDistribution& base, Vec3 offset);

double total_mass(const MassDistribution& dist);

/// Smallest geometric feature (sphere or rod diameter, grid cell) in meters.
double smallest_feature(const MassDistribution& dist);

struct BoundingBox {
  Vec3 lo;
  Vec3 hi;
};

BoundingBox bounding_box(const MassDistribution& dist);

enum class SingularityScheme {
  /// Coincident cells use the exact mean of 1/r over a cube; cube pairs up to
  /// two cells apart use tabulated exact cube-cube averages.
  cell_average,
  /// Coincident cells use a self-similar midpoint rule on a 2x2x2 split;
  /// every other pair uses the midpoint rule.
  offset_midpoint,
};

struct QuadratureConfig {
  int grid_resolution = 16;  // lattice cells per smallest feature, first level
  SingularityScheme singularity_scheme = SingularityScheme::cell_average;
  double rel_tolerance = 1e-3;
  int max_refinements = 4;       // each level multiplies the resolution by 1.25
  std::size_t max_nodes = 400000;

  void validate() const;
};

/// Newtonian potential phi(x) in J/kg. Closed form for spheres and lattices,
/// lattice quadrature for rods and grids.
double potential(const MassDistribution& dist, Vec3 x, const PhysicalConstants& consts = {},
                 const QuadratureConfig& cfg = {});

/// Gravitational self-energy of the density difference,
/// xi * G * integral (rho1 - rho2)(x) (rho1 - rho2)(y) / |x - y|.
/// Bit-exactly symmetric in its arguments and exactly zero for equal inputs.
double pair_eg(const MassDistribution& d1, const MassDistribution& d2,
               const QuadratureConfig& cfg = {}, const PhysicalConstants& consts = {});

/// Closed form of pair_eg for two uniform spheres of equal mass and diameter.
double sphere_pair_eg(double mass, double diameter, double separation,
                      const PhysicalConstants& consts = {});

struct FuzzinessPair {
  double state1 = 0.0;  // integral rho1 (phi2 - phi1), J
  double state2 = 0.0;  // integral rho2 (phi1 - phi2), J
  double sum() const { return state1 + state2; }
};

/// Energy uncertainty of each state from the clock-rate difference of the two
/// geometries. Evaluated through potentials rather than the double integral,
/// so the sum is an independent check of pair_eg. Both terms carry xi.
FuzzinessPair energy_fuzziness_pair(const MassDistribution& d1, const MassDistribution& d2,
                                    const QuadratureConfig& cfg = {},
                                    const PhysicalConstants& consts = {});

/// Newtonian-limit clock rate d tau / dt = 1 + phi(x) / c^2.
double time_dilation_factor(const MassDistribution& dist, Vec3 x,
                            const PhysicalConstants& consts = {},
                            const QuadratureConfig& cfg = {});

/// Weighted mean density sum_i w_i rho_i on a common grid with at least
/// cells_per_feature cells across the smallest feature. Throws
/// RasterizationExtentError when the union extent needs more than max_cells.
GridSampled mean_distribution(std::span<const MassDistribution> dists,
                              std::span<const double> weights, int cells_per_feature = 8,
                              std::size_t max_cells = 8'000'000);

/// Mutual interaction integrals W_ij = xi * G * integral rho_i rho_j / |x - y|
/// evaluated through potentials; E_G(i, j) = W_ii + W_jj - 2 W_ij.
std::vector<double> interaction_matrix(std::span<const MassDistribution> dists,
                                       const QuadratureConfig& cfg = {},
                                       const PhysicalConstants& consts = {});

}  // namespace reductionlab::massdist
