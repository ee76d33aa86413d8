#include <algorithm>
#include <cmath>
#include <vector>

#include "reductionlab/kernels.hpp"

namespace reductionlab::kernels::detail {

namespace {

double sum_blocks(const std::vector<double>& partial) {
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace

double self_pair_sum_scalar(const NodeSet& nodes) {
  const std::size_t n = nodes.size();
  const double* x = nodes.x.data();
  const double* y = nodes.y.data();
  const double* z = nodes.z.data();
  const double* m = nodes.m.data();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    double block_sum = 0.0;
    for (std::size_t i = b * kBlock; i < end; ++i) {
      double acc = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = x[i] - x[j];
        const double dy = y[i] - y[j];
        const double dz = z[i] - z[j];
        const double r2 = dx * dx + dy * dy + dz * dz;
        if (r2 > 0.0) acc += m[j] / std::sqrt(r2);
      }
      block_sum += m[i] * acc;
    }
    partial[b] = block_sum;
  }
  return sum_blocks(partial);
}

double cross_pair_sum_scalar(const NodeSet& a, const NodeSet& b) {
  const std::size_t n = a.size();
  const std::size_t nb = b.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t end = std::min(n, (blk + 1) * kBlock);
    double block_sum = 0.0;
    for (std::size_t i = blk * kBlock; i < end; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < nb; ++j) {
        const double dx = a.x[i] - b.x[j];
        const double dy = a.y[i] - b.y[j];
        const double dz = a.z[i] - b.z[j];
        const double r2 = dx * dx + dy * dy + dz * dz;
        if (r2 > 0.0) acc += b.m[j] / std::sqrt(r2);
      }
      block_sum += a.m[i] * acc;
    }
    partial[blk] = block_sum;
  }
  return sum_blocks(partial);
}

void potential_sums_scalar(const NodeSet& s, std::span<const Vec3> p, std::span<double> out) {
  const std::size_t ns = s.size();
  for (std::size_t k = 0; k < p.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
      const double dx = p[k].x - s.x[j];
      const double dy = p[k].y - s.y[j];
      const double dz = p[k].z - s.z[j];
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 > 0.0) acc += s.m[j] / std::sqrt(r2);
    }
    out[k] = acc;
  }
}

}  // namespace reductionlab::kernels::detail
