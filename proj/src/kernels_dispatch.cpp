#include <atomic>
#include <cstdlib>
#include <string>

#include "reductionlab/errors.hpp"
#include "reductionlab/kernels.hpp"

namespace reductionlab::kernels {

void NodeSet::reserve(std::size_t n) {
  x.reserve(n);
  y.reserve(n);
  z.reserve(n);
  m.reserve(n);
}

void NodeSet::push_back(const Vec3& p, double mass) {
  x.push_back(p.x);
  y.push_back(p.y);
  z.push_back(p.z);
  m.push_back(mass);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(REDUCTIONLAB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(REDUCTIONLAB_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

namespace {

Isa initial_isa() {
  // REDUCTIONLAB_ISA=scalar pins the reference kernels (e.g. for cross-machine
  // reproducibility of quadrature digits).
  if (const char* env = std::getenv("REDUCTIONLAB_ISA")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa) && isa_available(isa)) return isa;
    }
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidInput("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  active().store(isa, std::memory_order_relaxed);
}

double self_pair_sum(const NodeSet& nodes) { return self_pair_sum(nodes, active_isa()); }

double self_pair_sum(const NodeSet& nodes, Isa isa) {
  switch (isa) {
#if defined(REDUCTIONLAB_HAVE_AVX2)
    case Isa::avx2:
      return detail::self_pair_sum_avx2(nodes);
#endif
#if defined(REDUCTIONLAB_HAVE_NEON)
    case Isa::neon:
      return detail::self_pair_sum_neon(nodes);
#endif
    default:
      return detail::self_pair_sum_scalar(nodes);
  }
}

double cross_pair_sum(const NodeSet& a, const NodeSet& b) {
  return cross_pair_sum(a, b, active_isa());
}

double cross_pair_sum(const NodeSet& a, const NodeSet& b, Isa isa) {
  switch (isa) {
#if defined(REDUCTIONLAB_HAVE_AVX2)
    case Isa::avx2:
      return detail::cross_pair_sum_avx2(a, b);
#endif
#if defined(REDUCTIONLAB_HAVE_NEON)
    case Isa::neon:
      return detail::cross_pair_sum_neon(a, b);
#endif
    default:
      return detail::cross_pair_sum_scalar(a, b);
  }
}

void potential_sums(const NodeSet& sources, std::span<const Vec3> points, std::span<double> out) {
  potential_sums(sources, points, out, active_isa());
}

void potential_sums(const NodeSet& sources, std::span<const Vec3> points, std::span<double> out,
                    Isa isa) {
  if (out.size() < points.size()) throw InvalidInput("potential_sums: output span too small");
  switch (isa) {
#if defined(REDUCTIONLAB_HAVE_AVX2)
    case Isa::avx2:
      detail::potential_sums_avx2(sources, points, out);
      return;
#endif
#if defined(REDUCTIONLAB_HAVE_NEON)
    case Isa::neon:
      detail::potential_sums_neon(sources, points, out);
      return;
#endif
    default:
      detail::potential_sums_scalar(sources, points, out);
  }
}

}  // namespace reductionlab::kernels
