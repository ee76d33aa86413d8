#pragma once

// Sparse-lattice quadrature for signed sums of simple mass primitives.
//
// Every primitive is rasterised onto one global cubic lattice. Cells fully
// inside a primitive carry their exact mass at the cell centre; boundary
// cells are sub-sampled and carry the enclosed mass at its centroid. The
// double integral of rho(x) rho(y) / |x - y| is then a node sum with the
// singular and near-singular cell pairs replaced by exact cube averages.

#include <cstdint>
#include <vector>

#include "reductionlab/kernels.hpp"
#include "reductionlab/massdist.hpp"

namespace reductionlab::lattice {

struct Primitive {
  enum class Kind { sphere, cylinder, grid };
  Kind kind = Kind::sphere;
  double sign = 1.0;
  double mass = 0.0;
  Vec3 center;
  double radius = 0.0;
  Vec3 axis{0.0, 0.0, 1.0};
  double half_length = 0.0;
  const massdist::GridSampled* grid = nullptr;
  Vec3 grid_origin;  // grid->origin plus any displacement

  Vec3 lo() const;
  Vec3 hi() const;
  double smallest_feature() const;
};

/// Appends the primitives of dist, shifted by offset, with the given sign.
void flatten(const massdist::MassDistribution& dist, double sign, std::vector<Primitive>& out,
             Vec3 offset = {});

/// Sorts primitives into an order that ignores sign, so that swapping the
/// roles of two distributions yields the same sequence of operations.
void canonical_order(std::vector<Primitive>& prims);

bool all_spheres(const std::vector<Primitive>& prims);

struct Node {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;
  double mass = 0.0;
  Vec3 position;
  bool full = false;  // uniform over the whole cell
  double fill = 1.0;  // occupied fraction for boundary cells
};

struct Lattice {
  Vec3 origin;
  double h = 0.0;
  std::vector<Node> nodes;  // sorted by cell, zero-mass cells dropped
};

struct LatticeSpec {
  Vec3 origin;
  double h = 0.0;
};

/// Lattice spacing and origin for refinement level `level`.
LatticeSpec lattice_spec(const std::vector<Primitive>& prims, int resolution, int level);

/// Rasterises and merges. Throws RasterizationExtentError if the node count
/// exceeds max_nodes.
Lattice rasterize(const std::vector<Primitive>& prims, const LatticeSpec& spec,
                  std::size_t max_nodes);

/// Integral of rho(x) rho(y) / |x - y| over the lattice representation.
double interaction_energy(const Lattice& lat, massdist::SingularityScheme scheme);

/// Integral of rho(y) / |x - y| dy over the lattice representation.
double inverse_distance_potential(const Lattice& lat, Vec3 x);

kernels::NodeSet to_nodeset(const Lattice& lat);

/// Same functional for a sum of uniform spheres, in closed form. Requires
/// every overlapping pair to have equal radii; returns false otherwise.
bool sphere_interaction_energy(const std::vector<Primitive>& a, const std::vector<Primitive>& b,
                               double& out);

/// Integral of rho(y) / |x - y| dy for one uniform sphere.
double sphere_inverse_distance_potential(const Primitive& s, Vec3 x);

/// Integral rho_a rho_b / r for two equal uniform spheres of unit mass.
double equal_sphere_mutual(double radius, double separation);

/// Runs the refinement loop: evaluate(level) for level = 0, 1, ... until two
/// successive values agree within rel_tolerance / 2. Throws ConvergenceError.
template <class F>
double refine(const massdist::QuadratureConfig& cfg, F&& evaluate);

}  // namespace reductionlab::lattice

#include "lattice_refine.inl"
