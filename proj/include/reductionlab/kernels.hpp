#pragma once

// Inner loops of the lattice quadrature: sums of m_i m_j / |x_i - x_j| over
// node sets. A scalar reference variant is always built; an AVX2 variant is
// built on x86-64 and a NEON variant on AArch64. The variant is picked once at
// runtime from CPU capabilities and can be overridden for equivalence tests.
//
// All variants sum the outer index in fixed blocks and add the block partials
// in block order, so results do not depend on how blocks are scheduled.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "reductionlab/vec3.hpp"

namespace reductionlab::kernels {

/// Structure-of-arrays node set: positions and (signed) masses.
struct NodeSet {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;
  std::vector<double> m;

  std::size_t size() const { return m.size(); }
  void reserve(std::size_t n);
  void push_back(const Vec3& p, double mass);
};

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best variant supported by this binary on this CPU.
Isa detected_isa();

/// Variant used by the dispatching entry points below.
Isa active_isa();

/// Forces a variant; throws InvalidInput if it is not available.
void set_active_isa(Isa isa);

bool isa_available(Isa isa);

/// sum_{i<j} m_i m_j / r_ij, skipping coincident pairs.
double self_pair_sum(const NodeSet& nodes);
double self_pair_sum(const NodeSet& nodes, Isa isa);

/// sum_i sum_j a.m_i b.m_j / r_ij, skipping coincident pairs.
double cross_pair_sum(const NodeSet& a, const NodeSet& b);
double cross_pair_sum(const NodeSet& a, const NodeSet& b, Isa isa);

/// out[k] = sum_j m_j / |p_k - x_j|, skipping coincident pairs.
void potential_sums(const NodeSet& sources, std::span<const Vec3> points, std::span<double> out);
void potential_sums(const NodeSet& sources, std::span<const Vec3> points, std::span<double> out,
                    Isa isa);

namespace detail {
// Outer-loop block size shared by all variants.
inline constexpr std::size_t kBlock = 128;

double self_pair_sum_scalar(const NodeSet& nodes);
double cross_pair_sum_scalar(const NodeSet& a, const NodeSet& b);
void potential_sums_scalar(const NodeSet& s, std::span<const Vec3> p, std::span<double> out);

#if defined(REDUCTIONLAB_HAVE_AVX2)
double self_pair_sum_avx2(const NodeSet& nodes);
double cross_pair_sum_avx2(const NodeSet& a, const NodeSet& b);
void potential_sums_avx2(const NodeSet& s, std::span<const Vec3> p, std::span<double> out);
#endif

#if defined(REDUCTIONLAB_HAVE_NEON)
double self_pair_sum_neon(const NodeSet& nodes);
double cross_pair_sum_neon(const NodeSet& a, const NodeSet& b);
void potential_sums_neon(const NodeSet& s, std::span<const Vec3> p, std::span<double> out);
#endif
}  // namespace detail

}  // namespace reductionlab::kernels
