#include "lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <unordered_map>

#include "cube_kernels.hpp"
#include "reductionlab/errors.hpp"

namespace reductionlab::lattice {

namespace {

constexpr int kSub = 8;  // sub-samples per axis in boundary cells
constexpr std::int64_t kBias = std::int64_t{1} << 20;
constexpr std::int64_t kMaxIndex = (std::int64_t{1} << 21) - 1;

struct Contribution {
  std::uint64_t key = 0;
  double mass = 0.0;
  Vec3 centroid;
  bool full = false;
  double fill = 1.0;
};

std::uint64_t pack(std::int64_t i, std::int64_t j, std::int64_t k) {
  const auto bi = i + kBias;
  const auto bj = j + kBias;
  const auto bk = k + kBias;
  if (bi < 0 || bj < 0 || bk < 0 || bi > kMaxIndex || bj > kMaxIndex || bk > kMaxIndex) {
    throw RasterizationExtentError("lattice index out of range; extent too large for resolution");
  }
  return (std::uint64_t(bi) << 42) | (std::uint64_t(bj) << 21) | std::uint64_t(bk);
}

void unpack(std::uint64_t key, std::int64_t& i, std::int64_t& j, std::int64_t& k) {
  const std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
  i = std::int64_t((key >> 42) & mask) - kBias;
  j = std::int64_t((key >> 21) & mask) - kBias;
  k = std::int64_t(key & mask) - kBias;
}

double cylinder_extent(const Primitive& p, double a) {
  return p.half_length * std::abs(a) + p.radius * std::sqrt(std::max(0.0, 1.0 - a * a));
}

// Signed "inside" tests for a point; grid returns density.
bool inside_sphere(const Primitive& p, const Vec3& x) {
  const Vec3 d = x - p.center;
  return dot(d, d) <= p.radius * p.radius;
}

bool inside_cylinder(const Primitive& p, const Vec3& x) {
  const Vec3 d = x - p.center;
  const double t = dot(d, p.axis);
  if (std::abs(t) > p.half_length) return false;
  const Vec3 radial = d - p.axis * t;
  return dot(radial, radial) <= p.radius * p.radius;
}

double grid_density(const Primitive& p, const Vec3& x) {
  const auto& g = *p.grid;
  const Vec3 rel = (x - p.grid_origin) * (1.0 / g.cell_size);
  if (rel.x < 0.0 || rel.y < 0.0 || rel.z < 0.0) return 0.0;
  const auto i = std::size_t(rel.x);
  const auto j = std::size_t(rel.y);
  const auto k = std::size_t(rel.z);
  if (i >= g.nx || j >= g.ny || k >= g.nz) return 0.0;
  return g.at(i, j, k);
}

enum class CellClass { outside, inside, boundary };

CellClass classify(const Primitive& p, const Vec3& c, double h) {
  const double reach = 0.5 * std::sqrt(3.0) * h;
  if (p.kind == Primitive::Kind::sphere) {
    const double r = norm(c - p.center);
    if (r + reach <= p.radius) return CellClass::inside;
    if (r - reach >= p.radius) return CellClass::outside;
    return CellClass::boundary;
  }
  const Vec3 d = c - p.center;
  const double t = std::abs(dot(d, p.axis));
  const Vec3 radial = d - p.axis * dot(d, p.axis);
  const double rr = norm(radial);
  if (t + reach <= p.half_length && rr + reach <= p.radius) return CellClass::inside;
  if (t - reach >= p.half_length || rr - reach >= p.radius) return CellClass::outside;
  return CellClass::boundary;
}

void rasterize_shape(const Primitive& p, const LatticeSpec& spec, std::vector<Contribution>& out) {
  const double h = spec.h;
  const Vec3 lo = p.lo();
  const Vec3 hi = p.hi();
  const auto first = [&](double a, double o) { return std::int64_t(std::floor((a - o) / h)); };
  const std::int64_t i0 = first(lo.x, spec.origin.x), i1 = first(hi.x, spec.origin.x);
  const std::int64_t j0 = first(lo.y, spec.origin.y), j1 = first(hi.y, spec.origin.y);
  const std::int64_t k0 = first(lo.z, spec.origin.z), k1 = first(hi.z, spec.origin.z);
  const double volume = h * h * h;
  const double density = p.kind == Primitive::Kind::sphere
                             ? p.mass / (4.0 / 3.0 * std::numbers::pi * p.radius * p.radius *
                                         p.radius)
                             : p.mass / (std::numbers::pi * p.radius * p.radius * 2.0 *
                                         p.half_length);
  const std::size_t start = out.size();
  double full_mass = 0.0;
  double boundary_mass = 0.0;
  for (std::int64_t i = i0; i <= i1; ++i) {
    for (std::int64_t j = j0; j <= j1; ++j) {
      for (std::int64_t k = k0; k <= k1; ++k) {
        const Vec3 c{spec.origin.x + (double(i) + 0.5) * h, spec.origin.y + (double(j) + 0.5) * h,
                     spec.origin.z + (double(k) + 0.5) * h};
        const CellClass cls = classify(p, c, h);
        if (cls == CellClass::outside) continue;
        if (cls == CellClass::inside) {
          out.push_back({pack(i, j, k), density * volume, c, true, 1.0});
          full_mass += density * volume;
          continue;
        }
        int hits = 0;
        Vec3 sum;
        for (int a = 0; a < kSub; ++a) {
          for (int b = 0; b < kSub; ++b) {
            for (int q = 0; q < kSub; ++q) {
              const Vec3 x{c.x + ((a + 0.5) / kSub - 0.5) * h, c.y + ((b + 0.5) / kSub - 0.5) * h,
                           c.z + ((q + 0.5) / kSub - 0.5) * h};
              const bool in = p.kind == Primitive::Kind::sphere ? inside_sphere(p, x)
                                                                 : inside_cylinder(p, x);
              if (in) {
                ++hits;
                sum = sum + x;
              }
            }
          }
        }
        if (hits == 0) continue;
        const double fill = double(hits) / (kSub * kSub * kSub);
        const double m = density * volume * fill;
        out.push_back({pack(i, j, k), m, sum * (1.0 / hits), hits == kSub * kSub * kSub, fill});
        if (hits == kSub * kSub * kSub) {
          out.back().centroid = c;
          full_mass += m;
        } else {
          boundary_mass += m;
        }
      }
    }
  }
  // Boundary cells absorb the sampling error so the primitive keeps its mass.
  if (boundary_mass > 0.0) {
    const double scale = std::max(0.0, p.mass - full_mass) / boundary_mass;
    for (std::size_t n = start; n < out.size(); ++n) {
      if (!out[n].full) out[n].mass *= scale;
    }
  }
}

void rasterize_grid(const Primitive& p, const LatticeSpec& spec, std::vector<Contribution>& out) {
  const auto& g = *p.grid;
  const double h = spec.h;
  const Vec3 lo = p.lo();
  const Vec3 hi = p.hi();
  // A lattice cell entirely inside one grid cell carries that cell's density.
  const auto first = [&](double a, double o) { return std::int64_t(std::floor((a - o) / h)); };
  const auto last = [&](double a, double o) {
    return std::int64_t(std::ceil((a - o) / h)) - 1;
  };
  const std::int64_t i0 = first(lo.x, spec.origin.x), i1 = last(hi.x, spec.origin.x);
  const std::int64_t j0 = first(lo.y, spec.origin.y), j1 = last(hi.y, spec.origin.y);
  const std::int64_t k0 = first(lo.z, spec.origin.z), k1 = last(hi.z, spec.origin.z);
  const double volume = h * h * h;
  const double inv = 1.0 / g.cell_size;
  const double tol = 1e-9;
  const std::size_t start = out.size();
  double full_mass = 0.0;
  double boundary_mass = 0.0;
  for (std::int64_t i = i0; i <= i1; ++i) {
    for (std::int64_t j = j0; j <= j1; ++j) {
      for (std::int64_t k = k0; k <= k1; ++k) {
        const Vec3 cell_lo{spec.origin.x + double(i) * h, spec.origin.y + double(j) * h,
                           spec.origin.z + double(k) * h};
        const Vec3 c = cell_lo + Vec3{0.5 * h, 0.5 * h, 0.5 * h};
        const Vec3 a = (cell_lo - p.grid_origin) * inv;
        const Vec3 b = (cell_lo + Vec3{h, h, h} - p.grid_origin) * inv;
        const bool aligned = std::floor(a.x + tol) == std::floor(b.x - tol) &&
                             std::floor(a.y + tol) == std::floor(b.y - tol) &&
                             std::floor(a.z + tol) == std::floor(b.z - tol) && a.x > -tol &&
                             a.y > -tol && a.z > -tol && b.x < double(g.nx) + tol &&
                             b.y < double(g.ny) + tol && b.z < double(g.nz) + tol;
        if (aligned) {
          const double rho = g.at(std::size_t(std::floor(a.x + tol)),
                                  std::size_t(std::floor(a.y + tol)),
                                  std::size_t(std::floor(a.z + tol)));
          if (rho == 0.0) continue;
          out.push_back({pack(i, j, k), rho * volume, c, true, 1.0});
          full_mass += rho * volume;
          continue;
        }
        double m = 0.0;
        Vec3 sum;
        int hits = 0;
        for (int u = 0; u < kSub; ++u) {
          for (int v = 0; v < kSub; ++v) {
            for (int w = 0; w < kSub; ++w) {
              const Vec3 x{c.x + ((u + 0.5) / kSub - 0.5) * h, c.y + ((v + 0.5) / kSub - 0.5) * h,
                           c.z + ((w + 0.5) / kSub - 0.5) * h};
              const double rho = grid_density(p, x);
              if (rho == 0.0) continue;
              ++hits;
              m += rho;
              sum = sum + x * rho;
            }
          }
        }
        if (hits == 0 || m == 0.0) continue;
        const double fill = double(hits) / (kSub * kSub * kSub);
        out.push_back({pack(i, j, k), m * volume / (kSub * kSub * kSub), sum * (1.0 / m), false,
                       fill});
        boundary_mass += out.back().mass;
      }
    }
  }
  if (boundary_mass > 0.0) {
    const double scale = std::max(0.0, p.mass - full_mass) / boundary_mass;
    for (std::size_t n = start; n < out.size(); ++n) {
      if (!out[n].full) out[n].mass *= scale;
    }
  }
}

bool less_vec(const Vec3& a, const Vec3& b) {
  return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
}

bool equal_vec(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

bool canonical_less(const Primitive& a, const Primitive& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (!equal_vec(a.center, b.center)) return less_vec(a.center, b.center);
  if (a.radius != b.radius) return a.radius < b.radius;
  if (a.mass != b.mass) return a.mass < b.mass;
  if (a.half_length != b.half_length) return a.half_length < b.half_length;
  if (!equal_vec(a.axis, b.axis)) return less_vec(a.axis, b.axis);
  if (a.kind != Primitive::Kind::grid) return false;
  if (!equal_vec(a.grid_origin, b.grid_origin)) return less_vec(a.grid_origin, b.grid_origin);
  const auto& ga = *a.grid;
  const auto& gb = *b.grid;
  if (ga.cell_size != gb.cell_size) return ga.cell_size < gb.cell_size;
  if (std::tie(ga.nx, ga.ny, ga.nz) != std::tie(gb.nx, gb.ny, gb.nz)) {
    return std::tie(ga.nx, ga.ny, ga.nz) < std::tie(gb.nx, gb.ny, gb.nz);
  }
  return ga.densities < gb.densities;
}

}  // namespace

Vec3 Primitive::lo() const {
  switch (kind) {
    case Kind::sphere:
      return center - Vec3{radius, radius, radius};
    case Kind::cylinder:
      return center - Vec3{cylinder_extent(*this, axis.x), cylinder_extent(*this, axis.y),
                           cylinder_extent(*this, axis.z)};
    case Kind::grid:
      break;
  }
  return grid_origin;
}

Vec3 Primitive::hi() const {
  switch (kind) {
    case Kind::sphere:
      return center + Vec3{radius, radius, radius};
    case Kind::cylinder:
      return center + Vec3{cylinder_extent(*this, axis.x), cylinder_extent(*this, axis.y),
                           cylinder_extent(*this, axis.z)};
    case Kind::grid:
      break;
  }
  const double s = grid->cell_size;
  return grid_origin + Vec3{s * double(grid->nx), s * double(grid->ny), s * double(grid->nz)};
}

double Primitive::smallest_feature() const {
  if (kind == Kind::grid) return grid->cell_size;
  return 2.0 * radius;
}

void flatten(const massdist::MassDistribution& dist, double sign, std::vector<Primitive>& out,
             Vec3 offset) {
  using namespace massdist;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformSphere>) {
          if (v.mass == 0.0) return;
          Primitive p;
          p.kind = Primitive::Kind::sphere;
          p.sign = sign;
          p.mass = v.mass;
          p.center = v.center + offset;
          p.radius = 0.5 * v.diameter;
          out.push_back(p);
        } else if constexpr (std::is_same_v<T, UniformRod>) {
          if (v.mass == 0.0) return;
          Primitive p;
          p.kind = Primitive::Kind::cylinder;
          p.sign = sign;
          p.mass = v.mass;
          p.center = v.center + offset;
          p.radius = 0.5 * v.diameter;
          p.axis = v.axis;
          p.half_length = 0.5 * v.length;
          out.push_back(p);
        } else if constexpr (std::is_same_v<T, NucleusLattice>) {
          if (v.nucleus_mass == 0.0) return;
          for (const Vec3& pos : v.positions) {
            Primitive p;
            p.kind = Primitive::Kind::sphere;
            p.sign = sign;
            p.mass = v.nucleus_mass;
            p.center = pos + offset;
            p.radius = 0.5 * v.nucleus_diameter;
            out.push_back(p);
          }
        } else if constexpr (std::is_same_v<T, GridSampled>) {
          Primitive p;
          p.kind = Primitive::Kind::grid;
          p.sign = sign;
          p.mass = total_mass(dist);
          if (p.mass == 0.0) return;
          p.grid = &v;
          p.grid_origin = v.origin + offset;
          out.push_back(p);
        } else {
          flatten(*v.base, sign, out, offset + v.offset);
        }
      },
      dist.get());
}

void canonical_order(std::vector<Primitive>& prims) {
  std::stable_sort(prims.begin(), prims.end(), canonical_less);
}

bool all_spheres(const std::vector<Primitive>& prims) {
  return std::all_of(prims.begin(), prims.end(),
                     [](const Primitive& p) { return p.kind == Primitive::Kind::sphere; });
}

LatticeSpec lattice_spec(const std::vector<Primitive>& prims, int resolution, int level) {
  LatticeSpec spec;
  if (prims.empty()) {
    spec.h = 1.0;
    return spec;
  }
  const bool pure_grid = std::all_of(prims.begin(), prims.end(), [](const Primitive& p) {
    return p.kind == Primitive::Kind::grid;
  });
  // Grid cells are already piecewise constant and need no extra resolution.
  double feature = std::numeric_limits<double>::infinity();
  double grid_cell = std::numeric_limits<double>::infinity();
  Vec3 lo = prims.front().lo();
  for (const auto& p : prims) {
    if (p.kind == Primitive::Kind::grid) {
      grid_cell = std::min(grid_cell, p.grid->cell_size);
    } else {
      feature = std::min(feature, p.smallest_feature());
    }
    const Vec3 l = p.lo();
    lo = Vec3{std::min(lo.x, l.x), std::min(lo.y, l.y), std::min(lo.z, l.z)};
  }
  if (pure_grid) {
    spec.h = grid_cell / double(level + 1);
    spec.origin = prims.front().grid_origin;
  } else {
    spec.h = feature / (double(resolution) * std::pow(1.25, level));
    spec.origin = lo;
    const auto grid = std::find_if(prims.begin(), prims.end(), [](const Primitive& p) {
      return p.kind == Primitive::Kind::grid;
    });
    if (grid != prims.end()) {
      // Keep grid cells whole: an integer number of lattice cells per grid
      // cell, with lattice planes on the first grid's planes.
      spec.h = grid_cell / (std::ceil(grid_cell * resolution / feature) + level);
      const Vec3 g = grid->grid_origin;
      spec.origin = g - Vec3{std::ceil((g.x - lo.x) / spec.h), std::ceil((g.y - lo.y) / spec.h),
                             std::ceil((g.z - lo.z) / spec.h)} * spec.h;
    }
  }
  return spec;
}

Lattice rasterize(const std::vector<Primitive>& prims, const LatticeSpec& spec,
                  std::size_t max_nodes) {
  std::vector<Contribution> contributions;
  for (const auto& p : prims) {
    const std::size_t start = contributions.size();
    if (p.kind == Primitive::Kind::grid) {
      rasterize_grid(p, spec, contributions);
    } else {
      rasterize_shape(p, spec, contributions);
    }
    for (std::size_t n = start; n < contributions.size(); ++n) contributions[n].mass *= p.sign;
    if (contributions.size() > 4 * max_nodes) {
      throw RasterizationExtentError("lattice exceeds the configured node limit");
    }
  }
  std::stable_sort(contributions.begin(), contributions.end(),
                   [](const Contribution& a, const Contribution& b) { return a.key < b.key; });

  Lattice lat;
  lat.origin = spec.origin;
  lat.h = spec.h;
  std::size_t n = 0;
  while (n < contributions.size()) {
    std::size_t end = n;
    double mass = 0.0;
    double peak_density = 0.0;  // mass per occupied volume, largest contribution
    Vec3 moment;
    bool full = true;
    while (end < contributions.size() && contributions[end].key == contributions[n].key) {
      const Contribution& c = contributions[end];
      mass += c.mass;
      moment = moment + c.centroid * c.mass;
      peak_density = std::max(peak_density, std::abs(c.mass) / c.fill);
      full = full && c.full;
      ++end;
    }
    if (mass != 0.0) {
      Node node;
      unpack(contributions[n].key, node.i, node.j, node.k);
      node.mass = mass;
      node.full = full;
      const Vec3 lo{spec.origin.x + double(node.i) * spec.h, spec.origin.y + double(node.j) * spec.h,
                    spec.origin.z + double(node.k) * spec.h};
      if (full) {
        node.position = lo + Vec3{0.5 * spec.h, 0.5 * spec.h, 0.5 * spec.h};
        node.fill = 1.0;
      } else {
        // Centre of the net mass; partial cancellation can push it outside
        // the cell, so clamp it back in.
        const Vec3 c = moment * (1.0 / mass);
        node.position = Vec3{std::clamp(c.x, lo.x, lo.x + spec.h), std::clamp(c.y, lo.y, lo.y + spec.h),
                             std::clamp(c.z, lo.z, lo.z + spec.h)};
        node.fill = std::clamp(std::abs(mass) / peak_density, 1e-6, 1.0);
      }
      lat.nodes.push_back(node);
    }
    n = end;
  }
  if (lat.nodes.size() > max_nodes) {
    throw RasterizationExtentError("lattice has " + std::to_string(lat.nodes.size()) +
                                   " nodes, above the limit of " + std::to_string(max_nodes));
  }
  return lat;
}

kernels::NodeSet to_nodeset(const Lattice& lat) {
  kernels::NodeSet set;
  set.reserve(lat.nodes.size());
  for (const auto& n : lat.nodes) set.push_back(n.position, n.mass);
  return set;
}

double interaction_energy(const Lattice& lat, massdist::SingularityScheme scheme) {
  if (lat.nodes.empty()) return 0.0;
  const double h = lat.h;
  const kernels::NodeSet set = to_nodeset(lat);
  const double pairs = kernels::self_pair_sum(set);

  const double k_self = scheme == massdist::SingularityScheme::cell_average
                            ? cube::kSelfMeanInverseDistance
                            : cube::offset_midpoint_self_constant();
  double self = 0.0;
  for (const auto& n : lat.nodes) {
    const double f = n.full ? 1.0 : std::cbrt(1.0 / n.fill);
    self += n.mass * n.mass * k_self * f / h;
  }
  if (scheme == massdist::SingularityScheme::offset_midpoint) return 2.0 * pairs + self;

  // Full cells within two cells of each other: replace the centre-to-centre
  // kernel by the exact cube-cube average.
  std::unordered_map<std::uint64_t, std::size_t> full_index;
  full_index.reserve(lat.nodes.size() * 2);
  for (std::size_t n = 0; n < lat.nodes.size(); ++n) {
    const auto& node = lat.nodes[n];
    if (node.full) full_index.emplace(pack(node.i, node.j, node.k), n);
  }
  std::array<double, 125> table{};
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) {
      for (int c = -2; c <= 2; ++c) {
        table[((a + 2) * 5 + (b + 2)) * 5 + (c + 2)] = cube::mean_inverse_distance(a, b, c);
      }
    }
  }
  double correction = 0.0;
  for (std::size_t n = 0; n < lat.nodes.size(); ++n) {
    const auto& p = lat.nodes[n];
    if (!p.full) continue;
    double row = 0.0;
    for (int a = -2; a <= 2; ++a) {
      for (int b = -2; b <= 2; ++b) {
        for (int c = -2; c <= 2; ++c) {
          // Visit each unordered pair once: positive offsets only.
          if (std::make_tuple(a, b, c) <= std::make_tuple(0, 0, 0)) continue;
          const auto it = full_index.find(pack(p.i + a, p.j + b, p.k + c));
          if (it == full_index.end()) continue;
          const auto& q = lat.nodes[it->second];
          const double r = norm(p.position - q.position);
          row += q.mass * (table[((a + 2) * 5 + (b + 2)) * 5 + (c + 2)] / h - 1.0 / r);
        }
      }
    }
    correction += p.mass * row;
  }
  return 2.0 * pairs + self + 2.0 * correction;
}

double inverse_distance_potential(const Lattice& lat, Vec3 x) {
  const double h = lat.h;
  const Vec3 rel = (x - lat.origin) * (1.0 / h);
  const auto xi = std::int64_t(std::floor(rel.x));
  const auto xj = std::int64_t(std::floor(rel.y));
  const auto xk = std::int64_t(std::floor(rel.z));
  double total = 0.0;
  for (const auto& n : lat.nodes) {
    const bool near = std::max({std::abs(n.i - xi), std::abs(n.j - xj), std::abs(n.k - xk)}) <= 2;
    if (!near) {
      total += n.mass / norm(n.position - x);
      continue;
    }
    // Near cells are integrated exactly as uniform boxes.
    const Vec3 lo{lat.origin.x + double(n.i) * h, lat.origin.y + double(n.j) * h,
                  lat.origin.z + double(n.k) * h};
    const Vec3 hi = lo + Vec3{h, h, h};
    total += n.mass / (h * h * h) * cube::box_inverse_distance_integral(lo, hi, x);
  }
  return total;
}

double equal_sphere_mutual(double radius, double separation) {
  const double d = 2.0 * radius;
  if (separation >= d) return 1.0 / separation;
  const double l = separation / d;
  const double l2 = l * l;
  return 12.0 / (5.0 * d) - (2.0 / d) * (2.0 * l2 - 1.5 * l2 * l + 0.2 * l2 * l2 * l);
}

double sphere_inverse_distance_potential(const Primitive& s, Vec3 x) {
  const double r = norm(x - s.center);
  const double a = s.radius;
  if (r >= a) return s.mass / r;
  return s.mass * (3.0 * a * a - r * r) / (2.0 * a * a * a);
}

bool sphere_interaction_energy(const std::vector<Primitive>& a, const std::vector<Primitive>& b,
                               double& out) {
  double total = 0.0;
  for (const auto& p : a) {
    for (const auto& q : b) {
      const double d = norm(p.center - q.center);
      const double w = p.sign * q.sign * p.mass * q.mass;
      if (d >= p.radius + q.radius) {
        total += w / d;
      } else if (p.radius == q.radius) {
        total += w * equal_sphere_mutual(p.radius, d);
      } else {
        return false;
      }
    }
  }
  out = total;
  return true;
}

}  // namespace reductionlab::lattice
