#include "cube_kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "numerics.hpp"

namespace reductionlab::cube {

namespace {

// Integral over the box with corner at the origin, opposite corner v (all
// components in [0, 1], origin corner singular), of w(u)/|u| where u_k =
// sign_k * v_k and w(u) = prod (1 - |u_k - o_k|). Duffy split into three
// pyramids removes the singularity.
double duffy_corner(const std::array<int, 3>& sign, const std::array<int, 3>& o,
                    const numerics::GaussRule& g) {
  double total = 0.0;
  for (int apex = 0; apex < 3; ++apex) {
    const int a1 = (apex + 1) % 3;
    const int a2 = (apex + 2) % 3;
    for (std::size_t it = 0; it < g.nodes.size(); ++it) {
      const double t = g.nodes[it];
      for (std::size_t is = 0; is < g.nodes.size(); ++is) {
        const double s1 = g.nodes[is];
        for (std::size_t ir = 0; ir < g.nodes.size(); ++ir) {
          const double s2 = g.nodes[ir];
          std::array<double, 3> v{};
          v[apex] = t;
          v[a1] = t * s1;
          v[a2] = t * s2;
          double w = 1.0;
          for (int k = 0; k < 3; ++k) w *= 1.0 - std::abs(sign[k] * v[k] - o[k]);
          const double f = w * t / std::sqrt(1.0 + s1 * s1 + s2 * s2);
          total += g.weights[it] * g.weights[is] * g.weights[ir] * f;
        }
      }
    }
  }
  return total;
}

double tensor_box(const std::array<double, 3>& lo, const std::array<int, 3>& o,
                  const numerics::GaussRule& g) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double u0 = lo[0] + g.nodes[i];
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
      const double u1 = lo[1] + g.nodes[j];
      for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double u2 = lo[2] + g.nodes[k];
        const double w = (1.0 - std::abs(u0 - o[0])) * (1.0 - std::abs(u1 - o[1])) *
                         (1.0 - std::abs(u2 - o[2]));
        total += g.weights[i] * g.weights[j] * g.weights[k] * w /
                 std::sqrt(u0 * u0 + u1 * u1 + u2 * u2);
      }
    }
  }
  return total;
}

// The difference vector of two points in unit cubes offset by o has density
// prod (1 - |u_k - o_k|) on [o - 1, o + 1]; split that support into unit boxes.
double compute_mean_inverse_distance(std::array<int, 3> o) {
  const numerics::GaussRule g = numerics::gauss_legendre(20, 0.0, 1.0);
  double total = 0.0;
  for (int b = 0; b < 8; ++b) {
    std::array<double, 3> lo{};
    bool corner_at_origin = true;
    std::array<int, 3> sign{};
    for (int k = 0; k < 3; ++k) {
      const int low = o[k] - 1 + ((b >> k) & 1);  // box is [low, low + 1]
      lo[k] = low;
      if (low == 0) {
        sign[k] = 1;
      } else if (low == -1) {
        sign[k] = -1;
      } else {
        corner_at_origin = false;
      }
    }
    total += corner_at_origin ? duffy_corner(sign, o, g) : tensor_box(lo, o, g);
  }
  return total;
}

struct Table {
  std::array<double, 27> values{};
  Table() {
    for (int i = 0; i <= kTableReach; ++i) {
      for (int j = 0; j <= kTableReach; ++j) {
        for (int k = 0; k <= kTableReach; ++k) {
          values[(i * 3 + j) * 3 + k] =
              (i == 0 && j == 0 && k == 0) ? kSelfMeanInverseDistance
                                           : compute_mean_inverse_distance({i, j, k});
        }
      }
    }
  }
};

const Table& table() {
  static const Table t;
  return t;
}

// Antiderivative with d^3 Phi / dx dy dz = 1 / sqrt(x^2 + y^2 + z^2).
double xy_log_term(double x, double y, double z, double r) {
  if (x == 0.0 || y == 0.0) return 0.0;
  // log(z + r) loses everything when z < 0 and |z| ~ r.
  const double rho2 = x * x + y * y;
  const double lg = (z >= 0.0) ? std::log(z + r) : std::log(rho2 / (r - z));
  return x * y * lg;
}

double atan_term(double x, double y, double z, double r) {
  if (x == 0.0 || r == 0.0) return 0.0;
  return 0.5 * x * x * std::atan((y * z) / (x * r));
}

double antiderivative(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  return xy_log_term(x, y, z, r) + xy_log_term(y, z, x, r) + xy_log_term(z, x, y, r) -
         atan_term(x, y, z, r) - atan_term(y, z, x, r) - atan_term(z, x, y, r);
}

}  // namespace

double offset_midpoint_self_constant() {
  // Eight sub-cell centres on a half-cell lattice; 56 ordered distinct pairs:
  // 24 at h/2, 24 at h/sqrt(2), 8 at h*sqrt(3)/2.
  const double a = (24.0 * 2.0 + 24.0 * std::sqrt(2.0) + 8.0 * 2.0 / std::sqrt(3.0)) / 64.0;
  return 4.0 * a / 3.0;
}

double mean_inverse_distance(int ox, int oy, int oz) {
  std::array<int, 3> o{std::abs(ox), std::abs(oy), std::abs(oz)};
  if (o[0] > kTableReach || o[1] > kTableReach || o[2] > kTableReach) {
    return 1.0 / std::sqrt(double(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
  }
  return table().values[(o[0] * 3 + o[1]) * 3 + o[2]];
}

double box_inverse_distance_integral(const Vec3& lo, const Vec3& hi, const Vec3& x) {
  const double xs[2] = {lo.x - x.x, hi.x - x.x};
  const double ys[2] = {lo.y - x.y, hi.y - x.y};
  const double zs[2] = {lo.z - x.z, hi.z - x.z};
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double s = ((i + j + k) % 2 == 1) ? 1.0 : -1.0;
        total += s * antiderivative(xs[i], ys[j], zs[k]);
      }
    }
  }
  // (1,1,1) carries sign + because i + j + k = 3 is odd.
  return total;
}

}  // namespace reductionlab::cube
