#pragma once

#include "reductionlab/vec3.hpp"

namespace reductionlab::cube {

// Mean of 1/|x - y| for x, y uniform in the unit cube.
inline constexpr double kSelfMeanInverseDistance = 1.8823126443896601601;

// Self-similar midpoint estimate of the same quantity: a 2x2x2 split with
// midpoint interactions between distinct sub-cells and the coincident
// sub-cells resolved recursively, K = (4/3) * A.
double offset_midpoint_self_constant();

// Mean of 1/|x - y| for x in the unit cube and y in the unit cube displaced by
// the integer offset (ox, oy, oz). Exact to ~1e-13 for |o_k| <= 2; callers
// use 1/|o| beyond that.
double mean_inverse_distance(int ox, int oy, int oz);

inline constexpr int kTableReach = 2;

// Integral of 1/|x - y| over y in the box [lo, hi], closed form.
double box_inverse_distance_integral(const Vec3& lo, const Vec3& hi, const Vec3& x);

}  // namespace reductionlab::cube
