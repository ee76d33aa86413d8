// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "reductionlab/kernels.hpp"

namespace reductionlab::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// acc += m_j / |p - x_j| for j in [begin, end), coincident pairs skipped.
inline double row_sum(double px, double py, double pz, const double* x, const double* y,
                      const double* z, const double* m, std::size_t begin, std::size_t end) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  const __m256d vz = _mm256_set1_pd(pz);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = zero;
  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const __m256d dx = _mm256_sub_pd(vx, _mm256_loadu_pd(x + j));
    const __m256d dy = _mm256_sub_pd(vy, _mm256_loadu_pd(y + j));
    const __m256d dz = _mm256_sub_pd(vz, _mm256_loadu_pd(z + j));
    __m256d r2 = _mm256_mul_pd(dx, dx);
    r2 = _mm256_fmadd_pd(dy, dy, r2);
    r2 = _mm256_fmadd_pd(dz, dz, r2);
    const __m256d live = _mm256_cmp_pd(r2, zero, _CMP_GT_OQ);
    const __m256d safe_r2 = _mm256_blendv_pd(one, r2, live);
    const __m256d mj = _mm256_and_pd(_mm256_loadu_pd(m + j), live);
    acc = _mm256_add_pd(acc, _mm256_div_pd(mj, _mm256_sqrt_pd(safe_r2)));
  }
  double tail = 0.0;
  for (; j < end; ++j) {
    const double dx = px - x[j];
    const double dy = py - y[j];
    const double dz = pz - z[j];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 > 0.0) tail += m[j] / std::sqrt(r2);
  }
  return hsum(acc) + tail;
}

double sum_blocks(const std::vector<double>& partial) {
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace

double self_pair_sum_avx2(const NodeSet& nodes) {
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

double cross_pair_sum_avx2(const NodeSet& a, const NodeSet& b) {
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

void potential_sums_avx2(const NodeSet& s, std::span<const Vec3> p, std::span<double> out) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] = row_sum(p[k].x, p[k].y, p[k].z, s.x.data(), s.y.data(), s.z.data(), s.m.data(), 0,
                     s.size());
  }
}

}  // namespace reductionlab::kernels::detail
