#include "support.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "cube_kernels.hpp"
#include "reductionlab/kernels.hpp"

using namespace reductionlab;
using namespace reductionlab::kernels;

namespace {

NodeSet random_nodes(std::size_t n, std::uint32_t seed, bool with_duplicates) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(-0.5, 1.0);
  NodeSet s;
  for (std::size_t k = 0; k < n; ++k) {
    if (with_duplicates && k % 7 == 3) {
      s.push_back({s.x[k - 1], s.y[k - 1], s.z[k - 1]}, mass(gen));
    } else {
      s.push_back({pos(gen), pos(gen), pos(gen)}, mass(gen));
    }
  }
  return s;
}

double brute_self(const NodeSet& s) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double dx = s.x[i] - s.x[j];
      const double dy = s.y[i] - s.y[j];
      const double dz = s.z[i] - s.z[j];
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (r > 0.0) acc += static_cast<long double>(s.m[i]) * s.m[j] / r;
    }
  }
  return static_cast<double>(acc);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar self sum matches a long-double brute force") {
    for (std::size_t n : {1u, 2u, 5u, 130u, 301u}) {
      const NodeSet s = random_nodes(n, 11u + static_cast<std::uint32_t>(n), true);
      const double ref = brute_self(s);
      if (n == 1) {
        CHECK(self_pair_sum(s, Isa::scalar) == 0.0);
      } else {
        CHECK(self_pair_sum(s, Isa::scalar) == rel(ref, 1e-12));
      }
    }
  }

  TEST_CASE("every available variant agrees with the scalar reference") {
    for (Isa isa : {Isa::avx2, Isa::neon}) {
      if (!isa_available(isa)) continue;
      CAPTURE(isa_name(isa));
      for (std::size_t n : {3u, 4u, 7u, 128u, 129u, 517u}) {
        const NodeSet a = random_nodes(n, 3u * static_cast<std::uint32_t>(n), true);
        const NodeSet b = random_nodes(n / 2 + 1, 5u * static_cast<std::uint32_t>(n), false);
        CHECK(self_pair_sum(a, isa) ==
              rel(self_pair_sum(a, Isa::scalar), 1e-13));
        CHECK(cross_pair_sum(a, b, isa) ==
              rel(cross_pair_sum(a, b, Isa::scalar), 1e-13));
        std::vector<Vec3> pts{{0.1, 0.2, 0.3}, {a.x[0], a.y[0], a.z[0]}, {5.0, -2.0, 1.0}};
        std::vector<double> got(pts.size());
        std::vector<double> want(pts.size());
        potential_sums(a, pts, got, isa);
        potential_sums(a, pts, want, Isa::scalar);
        for (std::size_t k = 0; k < pts.size(); ++k) {
          CHECK(got[k] == rel(want[k], 1e-13));
        }
      }
    }
  }

  TEST_CASE("coincident nodes are skipped") {
    NodeSet s;
    s.push_back({0, 0, 0}, 1.0);
    s.push_back({0, 0, 0}, 2.0);
    s.push_back({3, 4, 0}, 1.0);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (!isa_available(isa)) continue;
      CHECK(self_pair_sum(s, isa) == rel(3.0 / 5.0));
    }
  }

  TEST_CASE("dispatch selects an available variant and can be forced") {
    const Isa before = active_isa();
    CHECK(isa_available(detected_isa()));
    set_active_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    const NodeSet s = random_nodes(50, 9, false);
    CHECK(self_pair_sum(s) == self_pair_sum(s, Isa::scalar));
    set_active_isa(before);
    if (!isa_available(Isa::neon)) CHECK_THROWS(set_active_isa(Isa::neon));
  }
}

TEST_SUITE("cube") {
  TEST_CASE("box integral of 1/r over the unit cube from a corner and the centre") {
    const double corner = cube::box_inverse_distance_integral({0, 0, 0}, {1, 1, 1}, {0, 0, 0});
    CHECK(corner == rel(1.190038681989776, 1e-13));
    const double centre =
        cube::box_inverse_distance_integral({0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.5});
    CHECK(centre == rel(2.3800773639795535, 1e-13));
    const double slab = cube::box_inverse_distance_integral({0, 0, 0}, {1, 2, 3}, {0, 0, 0});
    CHECK(slab == rel(3.57740611222258, 1e-12));
  }

  TEST_CASE("box integral tends to volume / distance far away") {
    const double far = cube::box_inverse_distance_integral({0, 0, 0}, {1, 1, 1}, {500.5, 0.5, 0.5});
    CHECK(far == rel(1.0 / 500.0, 1e-6));
  }

  TEST_CASE("mean inverse distance table") {
    CHECK(cube::mean_inverse_distance(0, 0, 0) ==
          rel(cube::kSelfMeanInverseDistance, 1e-12));
    CHECK(cube::mean_inverse_distance(1, 0, 0) == rel(0.980885183601, 1e-9));
    CHECK(cube::mean_inverse_distance(2, 2, 2) == rel(0.2887150871, 1e-9));
    CHECK(cube::mean_inverse_distance(0, 1, 0) == rel(cube::mean_inverse_distance(1, 0, 0), 1e-14));
    CHECK(cube::mean_inverse_distance(5, 0, 0) == rel(0.2));
  }
}
