#include "reductionlab/massdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cube_kernels.hpp"
#include "lattice.hpp"
#include "reductionlab/diagnostics.hpp"
#include "reductionlab/errors.hpp"

namespace reductionlab::massdist {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

void check_lattice_overlap(const NucleusLattice& l) {
  // Sweep along x; nuclei of one state must not overlap.
  std::vector<Vec3> p = l.positions;
  std::sort(p.begin(), p.end(), [](const Vec3& a, const Vec3& b) { return a.x < b.x; });
  const double d = l.nucleus_diameter;
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = a + 1; b < p.size() && p[b].x - p[a].x < d; ++b) {
      require(norm(p[b] - p[a]) >= d, "nucleus_lattice: nuclei overlap within one distribution");
    }
  }
}

std::vector<lattice::Primitive> primitives(const MassDistribution& d, double sign = 1.0) {
  std::vector<lattice::Primitive> prims;
  lattice::flatten(d, sign, prims);
  return prims;
}

// Integral rho rho / r of a signed primitive sum on the refined lattice.
double lattice_energy(std::vector<lattice::Primitive> prims, const QuadratureConfig& cfg) {
  if (prims.empty()) return 0.0;
  lattice::canonical_order(prims);
  return lattice::refine(cfg, [&](int level) {
    const auto spec = lattice::lattice_spec(prims, cfg.grid_resolution, level);
    const auto lat = lattice::rasterize(prims, spec, cfg.max_nodes);
    return lattice::interaction_energy(lat, cfg.singularity_scheme);
  });
}

double sphere_sum_potential(const std::vector<lattice::Primitive>& spheres, Vec3 x) {
  double total = 0.0;
  for (const auto& s : spheres) total += s.sign * lattice::sphere_inverse_distance_potential(s, x);
  return total;
}

// Integral of rho_a against the closed-form potential of the spheres in b.
double nodes_against_spheres(const std::vector<lattice::Primitive>& a,
                             const std::vector<lattice::Primitive>& b,
                             const QuadratureConfig& cfg) {
  auto prims = a;
  lattice::canonical_order(prims);
  return lattice::refine(cfg, [&](int level) {
    const auto spec = lattice::lattice_spec(prims, cfg.grid_resolution, level);
    const auto lat = lattice::rasterize(prims, spec, cfg.max_nodes);
    double total = 0.0;
    for (const auto& n : lat.nodes) total += n.mass * sphere_sum_potential(b, n.position);
    return total;
  });
}

// W_ab = integral rho_a rho_b / r (no G).
double mutual(const std::vector<lattice::Primitive>& a, const std::vector<lattice::Primitive>& b,
              const QuadratureConfig& cfg) {
  if (a.empty() || b.empty()) return 0.0;
  double closed = 0.0;
  if (lattice::all_spheres(a) && lattice::all_spheres(b) &&
      lattice::sphere_interaction_energy(a, b, closed)) {
    return closed;
  }
  if (lattice::all_spheres(b)) return nodes_against_spheres(a, b, cfg);
  if (lattice::all_spheres(a)) return nodes_against_spheres(b, a, cfg);
  // Polarisation: W_ab = (S(a + b) - S(a - b)) / 4.
  auto plus = a;
  auto minus = a;
  for (auto p : b) {
    plus.push_back(p);
    p.sign = -p.sign;
    minus.push_back(p);
  }
  return 0.25 * (lattice_energy(plus, cfg) - lattice_energy(minus, cfg));
}

double self_interaction(const std::vector<lattice::Primitive>& a, const QuadratureConfig& cfg) {
  if (a.empty()) return 0.0;
  double closed = 0.0;
  if (lattice::all_spheres(a) && lattice::sphere_interaction_energy(a, a, closed)) return closed;
  return lattice_energy(a, cfg);
}

double grid_inverse_distance_potential(const lattice::Primitive& p, Vec3 x) {
  const auto& g = *p.grid;
  const double h = g.cell_size;
  const Vec3 rel = (x - p.grid_origin) * (1.0 / h);
  double total = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t k = 0; k < g.nz; ++k) {
        const double rho = g.at(i, j, k);
        if (rho == 0.0) continue;
        const Vec3 lo = p.grid_origin + Vec3{double(i) * h, double(j) * h, double(k) * h};
        const double cheb = std::max({std::abs(rel.x - (double(i) + 0.5)),
                                      std::abs(rel.y - (double(j) + 0.5)),
                                      std::abs(rel.z - (double(k) + 0.5))});
        // A cube has no quadrupole moment, so the point-mass form is accurate
        // to (h / r)^4 beyond a few cells.
        if (cheb > 4.0) {
          total += rho * g.cell_volume() / norm(lo + Vec3{0.5 * h, 0.5 * h, 0.5 * h} - x);
        } else {
          total += rho * cube::box_inverse_distance_integral(lo, lo + Vec3{h, h, h}, x);
        }
      }
    }
  }
  return total;
}

}  // namespace

MassDistribution::MassDistribution(UniformSphere s) : value_(s) {
  require(non_negative(s.mass), "uniform_sphere: mass must be finite and >= 0");
  require(positive(s.diameter), "uniform_sphere: diameter must be > 0");
  require(is_finite(s.center), "uniform_sphere: center must be finite");
}

MassDistribution::MassDistribution(UniformRod r) : value_(r) {
  require(non_negative(r.mass), "uniform_rod: mass must be finite and >= 0");
  require(positive(r.length), "uniform_rod: length must be > 0");
  require(positive(r.diameter), "uniform_rod: diameter must be > 0");
  require(is_finite(r.center) && is_finite(r.axis), "uniform_rod: center and axis must be finite");
  const double len = norm(r.axis);
  require(len > 0.0, "uniform_rod: axis must be non-zero");
  std::get<UniformRod>(value_).axis = r.axis * (1.0 / len);
}

MassDistribution::MassDistribution(NucleusLattice l) : value_(std::move(l)) {
  const auto& v = std::get<NucleusLattice>(value_);
  require(non_negative(v.nucleus_mass), "nucleus_lattice: nucleus_mass must be finite and >= 0");
  require(positive(v.nucleus_diameter), "nucleus_lattice: nucleus_diameter must be > 0");
  for (const auto& p : v.positions) require(is_finite(p), "nucleus_lattice: positions must be finite");
  check_lattice_overlap(v);
}

MassDistribution::MassDistribution(GridSampled g) : value_(std::move(g)) {
  const auto& v = std::get<GridSampled>(value_);
  require(positive(v.cell_size), "grid: cell_size must be > 0");
  require(is_finite(v.origin), "grid: origin must be finite");
  require(v.nx > 0 && v.ny > 0 && v.nz > 0, "grid: every dimension must be >= 1");
  require(v.densities.size() == v.nx * v.ny * v.nz, "grid: densities size does not match shape");
  for (double rho : v.densities) require(non_negative(rho), "grid: densities must be finite and >= 0");
}

MassDistribution::MassDistribution(Displaced d) : value_(std::move(d)) {
  const auto& v = std::get<Displaced>(value_);
  require(v.base != nullptr, "displaced: base is missing");
  require(is_finite(v.offset), "displaced: offset must be finite");
}

MassDistribution sphere(double mass, double diameter, Vec3 center) {
  return MassDistribution(UniformSphere{mass, diameter, center});
}

MassDistribution rod(double mass, double length, double diameter, Vec3 axis, Vec3 center) {
  return MassDistribution(UniformRod{mass, length, diameter, axis, center});
}

MassDistribution displaced(const MassDistribution& base, Vec3 offset) {
  return MassDistribution(Displaced{std::make_shared<const MassDistribution>(base), offset});
}

double total_mass(const MassDistribution& dist) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformSphere> || std::is_same_v<T, UniformRod>) {
          return v.mass;
        } else if constexpr (std::is_same_v<T, NucleusLattice>) {
          return v.nucleus_mass * double(v.positions.size());
        } else if constexpr (std::is_same_v<T, GridSampled>) {
          double sum = 0.0;
          for (double rho : v.densities) sum += rho;
          return sum * v.cell_volume();
        } else {
          return total_mass(*v.base);
        }
      },
      dist.get());
}

double smallest_feature(const MassDistribution& dist) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformSphere> || std::is_same_v<T, UniformRod>) {
          return v.diameter;
        } else if constexpr (std::is_same_v<T, NucleusLattice>) {
          return v.nucleus_diameter;
        } else if constexpr (std::is_same_v<T, GridSampled>) {
          return v.cell_size;
        } else {
          return smallest_feature(*v.base);
        }
      },
      dist.get());
}

BoundingBox bounding_box(const MassDistribution& dist) {
  std::vector<lattice::Primitive> prims;
  lattice::flatten(dist, 1.0, prims);
  if (prims.empty()) return {};
  BoundingBox box{prims.front().lo(), prims.front().hi()};
  for (const auto& p : prims) {
    const Vec3 l = p.lo();
    const Vec3 h = p.hi();
    box.lo = {std::min(box.lo.x, l.x), std::min(box.lo.y, l.y), std::min(box.lo.z, l.z)};
    box.hi = {std::max(box.hi.x, h.x), std::max(box.hi.y, h.y), std::max(box.hi.z, h.z)};
  }
  return box;
}

void QuadratureConfig::validate() const {
  require(grid_resolution >= 2, "quadrature: grid_resolution must be >= 2");
  require(std::isfinite(rel_tolerance) && rel_tolerance > 0.0 && rel_tolerance < 1.0,
          "quadrature: rel_tolerance must lie in (0, 1)");
  require(max_refinements >= 1, "quadrature: max_refinements must be >= 1");
  require(max_nodes >= 8, "quadrature: max_nodes is too small");
}

double potential(const MassDistribution& dist, Vec3 x, const PhysicalConstants& consts,
                 const QuadratureConfig& cfg) {
  require(is_finite(x), "potential: evaluation point must be finite");
  cfg.validate();
  const auto prims = primitives(dist);
  double inverse = 0.0;
  std::vector<lattice::Primitive> cylinders;
  for (const auto& p : prims) {
    switch (p.kind) {
      case lattice::Primitive::Kind::sphere:
        inverse += lattice::sphere_inverse_distance_potential(p, x);
        break;
      case lattice::Primitive::Kind::grid:
        inverse += grid_inverse_distance_potential(p, x);
        break;
      case lattice::Primitive::Kind::cylinder:
        cylinders.push_back(p);
        break;
    }
  }
  if (!cylinders.empty()) {
    lattice::canonical_order(cylinders);
    inverse += lattice::refine(cfg, [&](int level) {
      const auto spec = lattice::lattice_spec(cylinders, cfg.grid_resolution, level);
      return lattice::inverse_distance_potential(
          lattice::rasterize(cylinders, spec, cfg.max_nodes), x);
    });
  }
  return -consts.G * inverse;
}

double pair_eg(const MassDistribution& d1, const MassDistribution& d2, const QuadratureConfig& cfg,
               const PhysicalConstants& consts) {
  cfg.validate();
  consts.validate();
  const double m1 = total_mass(d1);
  const double m2 = total_mass(d2);
  if (std::abs(m1 - m2) > 1e-9 * std::max(m1, m2)) {
    warn("pair_eg: the two distributions have different total mass");
  }
  std::vector<lattice::Primitive> prims;
  lattice::flatten(d1, 1.0, prims);
  lattice::flatten(d2, -1.0, prims);
  const double e = lattice_energy(std::move(prims), cfg);
  return consts.xi * consts.G * std::max(0.0, e);
}

double sphere_pair_eg(double mass, double diameter, double separation,
                      const PhysicalConstants& consts) {
  require(non_negative(mass), "sphere_pair_eg: mass must be finite and >= 0");
  require(positive(diameter), "sphere_pair_eg: diameter must be > 0");
  require(non_negative(separation) || separation == std::numeric_limits<double>::infinity(),
          "sphere_pair_eg: separation must be >= 0");
  const double radius = 0.5 * diameter;
  const double self = lattice::equal_sphere_mutual(radius, 0.0);
  const double cross =
      std::isinf(separation) ? 0.0 : lattice::equal_sphere_mutual(radius, separation);
  return consts.xi * consts.G * mass * mass * 2.0 * (self - cross);
}

FuzzinessPair energy_fuzziness_pair(const MassDistribution& d1, const MassDistribution& d2,
                                    const QuadratureConfig& cfg,
                                    const PhysicalConstants& consts) {
  cfg.validate();
  consts.validate();
  const auto a = primitives(d1);
  const auto b = primitives(d2);
  const double w11 = self_interaction(a, cfg);
  const double w22 = self_interaction(b, cfg);
  const double w12 = mutual(a, b, cfg);
  const double scale = consts.xi * consts.G;
  return {scale * (w11 - w12), scale * (w22 - w12)};
}

double time_dilation_factor(const MassDistribution& dist, Vec3 x, const PhysicalConstants& consts,
                            const QuadratureConfig& cfg) {
  return 1.0 + potential(dist, x, consts, cfg) / (consts.c_light * consts.c_light);
}

GridSampled mean_distribution(std::span<const MassDistribution> dists,
                              std::span<const double> weights, int cells_per_feature,
                              std::size_t max_cells) {
  require(!dists.empty(), "mean_distribution: no distributions");
  require(dists.size() == weights.size(), "mean_distribution: one weight per distribution");
  require(cells_per_feature >= 1, "mean_distribution: cells_per_feature must be >= 1");
  double wsum = 0.0;
  for (double w : weights) {
    require(non_negative(w), "mean_distribution: weights must be >= 0");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) <= 1e-12, "mean_distribution: weights must sum to 1");

  double feature = std::numeric_limits<double>::infinity();
  BoundingBox box{};
  bool first = true;
  for (std::size_t n = 0; n < dists.size(); ++n) {
    if (total_mass(dists[n]) == 0.0) continue;
    feature = std::min(feature, smallest_feature(dists[n]));
    const BoundingBox b = bounding_box(dists[n]);
    if (first) {
      box = b;
      first = false;
    } else {
      box.lo = {std::min(box.lo.x, b.lo.x), std::min(box.lo.y, b.lo.y), std::min(box.lo.z, b.lo.z)};
      box.hi = {std::max(box.hi.x, b.hi.x), std::max(box.hi.y, b.hi.y), std::max(box.hi.z, b.hi.z)};
    }
  }
  GridSampled grid;
  if (first) {
    // Nothing carries mass: a single empty cell.
    grid.cell_size = smallest_feature(dists[0]);
    grid.origin = bounding_box(dists[0]).lo;
    grid.nx = grid.ny = grid.nz = 1;
    grid.densities.assign(1, 0.0);
    return grid;
  }
  const double h = feature / cells_per_feature;
  const auto cells = [&](double lo, double hi) {
    return static_cast<double>(std::floor((hi - lo) / h)) + 1.0;
  };
  const double nx = cells(box.lo.x, box.hi.x);
  const double ny = cells(box.lo.y, box.hi.y);
  const double nz = cells(box.lo.z, box.hi.z);
  if (nx * ny * nz > double(max_cells)) {
    throw RasterizationExtentError(
        "mean_distribution: union extent needs " + std::to_string(nx * ny * nz) +
        " cells at the required resolution, above the limit of " + std::to_string(max_cells));
  }
  grid.origin = box.lo;
  grid.cell_size = h;
  grid.nx = std::size_t(nx);
  grid.ny = std::size_t(ny);
  grid.nz = std::size_t(nz);
  grid.densities.assign(grid.nx * grid.ny * grid.nz, 0.0);
  const lattice::LatticeSpec spec{box.lo, h};
  const double volume = h * h * h;
  for (std::size_t n = 0; n < dists.size(); ++n) {
    if (weights[n] == 0.0) continue;
    const auto prims = primitives(dists[n]);
    if (prims.empty()) continue;
    const auto lat = lattice::rasterize(prims, spec, max_cells);
    for (const auto& node : lat.nodes) {
      const auto i = std::size_t(std::clamp<std::int64_t>(node.i, 0, std::int64_t(grid.nx) - 1));
      const auto j = std::size_t(std::clamp<std::int64_t>(node.j, 0, std::int64_t(grid.ny) - 1));
      const auto k = std::size_t(std::clamp<std::int64_t>(node.k, 0, std::int64_t(grid.nz) - 1));
      grid.densities[(i * grid.ny + j) * grid.nz + k] += weights[n] * node.mass / volume;
    }
  }
  return grid;
}

std::vector<double> interaction_matrix(std::span<const MassDistribution> dists,
                                       const QuadratureConfig& cfg,
                                       const PhysicalConstants& consts) {
  cfg.validate();
  consts.validate();
  const std::size_t n = dists.size();
  std::vector<std::vector<lattice::Primitive>> prims;
  prims.reserve(n);
  for (const auto& d : dists) prims.push_back(primitives(d));
  std::vector<double> w(n * n, 0.0);
  const double scale = consts.xi * consts.G;
  for (std::size_t i = 0; i < n; ++i) {
    w[i * n + i] = scale * self_interaction(prims[i], cfg);
    for (std::size_t j = i + 1; j < n; ++j) {
      w[i * n + j] = w[j * n + i] = scale * mutual(prims[i], prims[j], cfg);
    }
  }
  return w;
}

}  // namespace reductionlab::massdist
