#pragma once

// Small superpositions shared by the unit and acceptance tests.

#include <cstddef>
#include <initializer_list>
#include <random>
#include <vector>

#include "reductionlab/reduction.hpp"

namespace testing {

// Coupling unit: 1e-25 J gives trigger rates near 1e9 / s.
inline constexpr double kE = 1e-25;

inline reductionlab::reduction::Superposition make_superposition(
    std::vector<double> weights, std::initializer_list<std::initializer_list<double>> rows,
    double unit = kE) {
  reductionlab::reduction::Superposition s;
  s.weights = std::move(weights);
  s.couplings = reductionlab::reduction::SquareMatrix(s.weights.size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) s.couplings(i, j++) = v * unit;
    ++i;
  }
  return s;
}

inline std::vector<double> random_weights(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) sum += (x = u(gen));
  for (auto& x : w) x /= sum;
  return w;
}

// Random symmetric couplings; each pair is zero with probability p_zero.
inline reductionlab::reduction::Superposition random_superposition(std::mt19937_64& gen,
                                                                   std::size_t n,
                                                                   double p_zero = 0.3) {
  reductionlab::reduction::Superposition s;
  s.weights = random_weights(gen, n);
  s.couplings = reductionlab::reduction::SquareMatrix(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = u(gen) < p_zero ? 0.0 : (0.1 + u(gen)) * kE;
      s.couplings(i, j) = s.couplings(j, i) = v;
    }
  }
  if (n > 1 && s.max_coupling() == 0.0) s.couplings(0, 1) = s.couplings(1, 0) = kE;
  return s;
}

}  // namespace testing
