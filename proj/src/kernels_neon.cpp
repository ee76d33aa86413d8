// AArch64 variant. NEON is mandatory on AArch64, so no runtime check is needed.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "reductionlab/kernels.hpp"

namespace reductionlab::kernels::detail {

namespace {

inline double row_sum(double px, double py, double pz, const double* x, const double* y,
                      const double* z, const double* m, std::size_t begin, std::size_t end) {
  const float64x2_t vx = vdupq_n_f64(px);
  const float64x2_t vy = vdupq_n_f64(py);
  const float64x2_t vz = vdupq_n_f64(pz);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t acc0 = zero;
  float64x2_t acc1 = zero;
  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) {
    for (int half = 0; half < 2; ++half) {
      const std::size_t o = j + 2 * half;
      const float64x2_t dx = vsubq_f64(vx, vld1q_f64(x + o));
      const float64x2_t dy = vsubq_f64(vy, vld1q_f64(y + o));
      const float64x2_t dz = vsubq_f64(vz, vld1q_f64(z + o));
      float64x2_t r2 = vmulq_f64(dx, dx);
      r2 = vfmaq_f64(r2, dy, dy);
      r2 = vfmaq_f64(r2, dz, dz);
      const uint64x2_t live = vcgtq_f64(r2, zero);
      const float64x2_t safe_r2 = vbslq_f64(live, r2, one);
      const float64x2_t mj = vbslq_f64(live, vld1q_f64(m + o), zero);
      const float64x2_t term = vdivq_f64(mj, vsqrtq_f64(safe_r2));
      if (half == 0) {
        acc0 = vaddq_f64(acc0, term);
      } else {
        acc1 = vaddq_f64(acc1, term);
      }
    }
  }
  double tail = 0.0;
  for (; j < end; ++j) {
    const double dx = px - x[j];
    const double dy = py - y[j];
    const double dz = pz - z[j];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 > 0.0) tail += m[j] / std::sqrt(r2);
  }
  return vaddvq_f64(vaddq_f64(acc0, acc1)) + tail;
}

double sum_blocks(const std::vector<double>& partial) {
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace

double self_pair_sum_neon(const NodeSet& nodes) {
  const std::size_t n = nodes.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    double block_sum = 0.0;
    for (std::size_t i = b * kBlock; i < end; ++i) {
      block_sum += nodes.m[i] * row_sum(nodes.x[i], nodes.y[i], nodes.z[i], nodes.x.data(),
                                        nodes.y.data(), nodes.z.data(), nodes.m.data(), i + 1, n);
    }
    partial[b] = block_sum;
  }
  return sum_blocks(partial);
}

double cross_pair_sum_neon(const NodeSet& a, const NodeSet& b) {
  const std::size_t n = a.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t end = std::min(n, (blk + 1) * kBlock);
    double block_sum = 0.0;
    for (std::size_t i = blk * kBlock; i < end; ++i) {
      block_sum += a.m[i] * row_sum(a.x[i], a.y[i], a.z[i], b.x.data(), b.y.data(), b.z.data(),
                                    b.m.data(), 0, b.size());
    }
    partial[blk] = block_sum;
  }
  return sum_blocks(partial);
}

void potential_sums_neon(const NodeSet& s, std::span<const Vec3> p, std::span<double> out) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] = row_sum(p[k].x, p[k].y, p[k].z, s.x.data(), s.y.data(), s.z.data(), s.m.data(), 0,
                     s.size());
  }
}

}  // namespace reductionlab::kernels::detail
