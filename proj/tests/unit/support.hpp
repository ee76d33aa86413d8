#pragma once

#include <doctest.h>

// Relative comparison without doctest's default absolute slack of 1, which
// would make every check on SI-sized energies vacuous.
inline doctest::Approx rel(double value, double eps = 1e-12) {
  return doctest::Approx(value).epsilon(eps).scale(0.0);
}

#include "fixtures.hpp"
