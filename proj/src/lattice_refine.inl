#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "reductionlab/errors.hpp"

namespace reductionlab::lattice {

template <class F>
double refine(const massdist::QuadratureConfig& cfg, F&& evaluate) {
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int level = 0; level <= cfg.max_refinements; ++level) {
    double current = 0.0;
    try {
      current = evaluate(level);
    } catch (const RasterizationExtentError&) {
      if (level == 0) throw;
      throw ConvergenceError("quadrature hit the node limit before converging", previous,
                             std::numeric_limits<double>::quiet_NaN());
    }
    if (level > 0) {
      const double diff = std::abs(current - previous);
      if (diff <= 0.5 * cfg.rel_tolerance * std::abs(current)) return current;
    }
    if (current == 0.0 && level > 0 && previous == 0.0) return 0.0;
    if (level == cfg.max_refinements) {
      throw ConvergenceError("quadrature did not reach rel_tolerance " +
                                 std::to_string(cfg.rel_tolerance),
                             current, previous);
    }
    previous = current;
  }
  return previous;
}

}  // namespace reductionlab::lattice
