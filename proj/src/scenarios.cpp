#include "reductionlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reductionlab/errors.hpp"

namespace reductionlab::scenarios {

namespace {

using reduction::CouplingProfile;
using reduction::OutcomeDistribution;
using reduction::SquareMatrix;
using reduction::Superposition;

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

void require_energy(double e) {
  require(std::isfinite(e) && e > 0.0, "e_plateau must be finite and > 0");
}

std::vector<double> normalised(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) {
    require(std::isfinite(v) && v >= 0.0, "weights must be finite and >= 0");
    sum += v;
  }
  require(sum > 0.0, "weights must not all vanish");
  for (double& v : w) v /= sum;
  return w;
}

OutcomeDistribution singletons(const std::vector<double>& p) {
  OutcomeDistribution out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) out[{k}] = p[k];
  }
  return out;
}

std::vector<std::size_t> all_but(std::size_t n, std::size_t skip) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != skip) out.push_back(k);
  }
  return out;
}

// E_1j = e for j >= 2 and every other pair uncoupled; returns e.
double fig3b_energy(const Scenario& base) {
  const auto& e = base.superposition.couplings;
  const std::size_t n = base.size();
  require(n >= 2, "delayed sweep needs at least two detectors");
  const double e1 = e(0, 1);
  require(e1 > 0.0, "delayed sweep needs a scenario built like fig3b");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double want = i == 0 ? e1 : 0.0;
      require(std::abs(e(i, j) - want) <= 1e-12 * e1,
              "delayed sweep needs a scenario built like fig3b");
    }
  }
  return e1;
}

}  // namespace

void Scenario::validate() const {
  superposition.validate();
  require(profile.size() == superposition.size(),
          "scenario profile dimension does not match the superposition");
  profile.validate(superposition.size());
  if (expected) {
    double sum = 0.0;
    for (const auto& [set, p] : expected->outcomes) {
      require(!set.empty(), "expected outcome sets must not be empty");
      for (std::size_t k : set) require(k < size(), "expected outcome names an unknown state");
      require(std::isfinite(p) && p >= 0.0, "expected probabilities must be >= 0");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "expected probabilities must sum to 1");
  }
}

Scenario build_detector_network(std::string name, std::vector<double> weights,
                                const std::vector<double>& detector_eg,
                                const reduction::Shape& profile) {
  const std::size_t n = weights.size();
  require(n >= 2, "a detector network needs at least two detectors");
  require(detector_eg.size() == n, "one detector energy per state is required");
  for (double e : detector_eg) {
    require(std::isfinite(e) && e >= 0.0, "detector energies must be finite and >= 0");
  }
  reduction::validate_shape(profile);
  Scenario s;
  s.name = std::move(name);
  s.superposition.weights = normalised(std::move(weights));
  s.superposition.couplings = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s.superposition.couplings(i, j) = detector_eg[i] + detector_eg[j];
    }
  }
  s.profile = CouplingProfile::uniform(n, profile);
  return s;
}

Scenario build_fig3a(std::size_t n_detectors, double e_plateau, const reduction::Shape& profile) {
  require(n_detectors >= 2, "fig3a needs n >= 2");
  require_energy(e_plateau);
  Scenario s = build_detector_network("fig3a", std::vector<double>(n_detectors, 1.0),
                                      std::vector<double>(n_detectors, e_plateau), profile);
  s.expected = Expected{singletons(s.superposition.weights),
                        "projection postulate: every detector changes its mass distribution"};
  s.notes = "all detectors change their mass-density distribution";
  return s;
}

Scenario build_fig3b(std::size_t n_detectors, double e_plateau, const reduction::Shape& profile) {
  require(n_detectors >= 2, "fig3b needs n >= 2");
  require_energy(e_plateau);
  std::vector<double> eg(n_detectors, 0.0);
  eg[0] = e_plateau;
  Scenario s = build_detector_network("fig3b", std::vector<double>(n_detectors, 1.0), eg, profile);
  OutcomeDistribution expected;
  expected[{0}] = 0.5;
  expected[all_but(n_detectors, 0)] = 0.5;
  s.expected = Expected{expected, "50% rule: only detector 1 changes its mass distribution"};
  s.notes = "detectors 2..n conserve their mass-density distribution";
  return s;
}

Scenario build_two_detector_overlap(double c1sq, double c2sq, double e_plateau) {
  require_energy(e_plateau);
  require(c1sq >= 0.0 && c2sq >= 0.0 && c1sq + c2sq <= 1.0 + 1e-12,
          "overlap weights must be >= 0 and sum to at most 1");
  const double c3sq = std::max(0.0, 1.0 - c1sq - c2sq);
  Scenario s;
  s.name = "two_detector_overlap";
  s.superposition.weights = {c1sq, c2sq, c3sq};
  s.superposition.couplings = SquareMatrix(3);
  auto& e = s.superposition.couplings;
  e(0, 1) = e(1, 0) = 2.0 * e_plateau;
  e(0, 2) = e(2, 0) = e_plateau;
  e(1, 2) = e(2, 1) = e_plateau;
  s.profile = CouplingProfile::uniform(3);
  // Column sums (3e, 3e, 2e) over the states actually present.
  const double w[3] = {c1sq, c2sq, c3sq};
  std::vector<double> p(3, 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (i != j && w[i] > 0.0) column += e(i, j) / e_plateau;
    }
    p[j] = column * w[j];
  }
  const double total = p[0] + p[1] + p[2];
  if (total > 0.0) {
    for (double& v : p) v /= total;
    s.expected = Expected{singletons(p), "weighted column sums (3e, 3e, 2e)"};
  }
  s.notes = "particle seen by both detectors at once; p1/p2 follows c1sq/c2sq";
  return s;
}

Scenario build_continuous_medium(std::size_t n_cells, std::vector<double> weight_profile,
                                 double e_plateau) {
  require(n_cells >= 2, "continuous medium needs at least two cells");
  require(weight_profile.size() == n_cells, "weight profile length must equal n_cells");
  require_energy(e_plateau);
  Scenario s = build_detector_network("continuous_medium", std::move(weight_profile),
                                      std::vector<double>(n_cells, e_plateau));
  s.expected = Expected{singletons(s.superposition.weights),
                        "projection postulate: all off-diagonal couplings equal"};
  s.notes = "medium modelled as many small detectors";
  return s;
}

double star_center_probability(std::size_t k, double w_center) {
  const double kw = static_cast<double>(k) * w_center;
  return kw / (kw + 1.0 - w_center);
}

double star_original_asymptotic(std::size_t n_mutants, double c1sq) {
  return 1.0 - (1.0 - c1sq) / (static_cast<double>(n_mutants) * c1sq);
}

double star_mutant_asymptotic(double c1sq) { return (1.0 - c1sq) / (2.0 - c1sq); }

Scenario build_biology_star(std::size_t n_mutants, double c1sq, StarCenter center,
                            double e_plateau) {
  require(n_mutants >= 1, "biology star needs at least one mutant");
  require(c1sq > 0.0 && c1sq < 1.0, "c1sq must lie in (0, 1)");
  require_energy(e_plateau);
  const std::size_t n = n_mutants + 1;
  Scenario s;
  s.name = center == StarCenter::original ? "biology_star_original" : "biology_star_mutant";
  s.superposition.weights.assign(n, (1.0 - c1sq) / static_cast<double>(n_mutants));
  s.superposition.weights[0] = c1sq;
  s.superposition.couplings = SquareMatrix(n);
  const std::size_t c = center == StarCenter::original ? 0 : 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == c) continue;
    s.superposition.couplings(c, k) = e_plateau;
    s.superposition.couplings(k, c) = e_plateau;
  }
  s.profile = CouplingProfile::uniform(n);
  const double p = center == StarCenter::original ? star_original_asymptotic(n_mutants, c1sq)
                                                  : star_mutant_asymptotic(c1sq);
  OutcomeDistribution expected;
  expected[{c}] = p;
  expected[all_but(n, c)] = 1.0 - p;
  s.expected = Expected{expected, center == StarCenter::original
                                      ? "large-n return probability to the original state"
                                      : "large-n selective reduction towards the mutant"};
  s.notes = "only the centre state differs in mass-density distribution";
  return s;
}

Scenario delayed_detector_scenario(const Scenario& base, double delta_t) {
  require(std::isfinite(delta_t) && delta_t >= 0.0, "delays must be finite and >= 0");
  const double e = fig3b_energy(base);
  const std::size_t n = base.size();
  Scenario s;
  s.name = "delayed_detector";
  s.superposition.weights = base.superposition.weights;
  s.superposition.couplings = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s.superposition.couplings(i, j) = 2.0 * e;
    }
  }
  // Pairs among 2..n switch on at delta_t; pairs with state 1 carry half
  // their coupling from the start.
  s.profile = CouplingProfile::uniform(n, reduction::Ramp{delta_t, 0.0});
  const std::size_t half = s.profile.add_shape(reduction::Table{{{delta_t, 0.5}, {delta_t, 1.0}}});
  for (std::size_t j = 1; j < n; ++j) s.profile.assign(0, j, half);
  s.notes = "conserving detectors start changing their distribution after a delay";
  return s;
}

DelayedSweep delayed_detector_sweep(const Scenario& base, const std::vector<double>& delta_ts,
                                    const PhysicalConstants& consts) {
  fig3b_energy(base);
  const std::size_t n = base.size();
  DelayedSweep out;
  out.p_immediate = 1.0 / static_cast<double>(n);
  out.p_late = 0.5;
  double e_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      e_total += base.superposition.couplings(i, j) * base.superposition.weights[j];
    }
  }
  out.tau_reference = consts.hbar / e_total;
  const double rate = e_total / consts.hbar;
  for (double dt : delta_ts) {
    const Scenario s = delayed_detector_scenario(base, dt);
    const auto dist = reduction::cascade_distribution(s.superposition, s.profile, {}, consts);
    SweepPoint pt;
    pt.delta_t = dt;
    const auto it = dist.find({0});
    pt.p1 = it == dist.end() ? 0.0 : it->second;
    pt.exact = out.p_immediate + (out.p_late - out.p_immediate) * -std::expm1(-rate * dt);
    out.points.push_back(pt);
  }

  // Least squares for p_late - A exp(-dt / tau): A is linear, tau is found
  // by a log-grid scan followed by golden-section refinement.
  double span_lo = std::numeric_limits<double>::infinity();
  double span_hi = 0.0;
  for (const auto& pt : out.points) {
    if (pt.delta_t > 0.0) {
      span_lo = std::min(span_lo, pt.delta_t);
      span_hi = std::max(span_hi, pt.delta_t);
    }
  }
  if (out.points.size() < 2 || !(span_hi > 0.0)) return out;
  const auto residual = [&](double log_tau, double* amplitude) {
    const double tau = std::exp(log_tau);
    double yg = 0.0;
    double gg = 0.0;
    for (const auto& pt : out.points) {
      const double g = std::exp(-pt.delta_t / tau);
      yg += (out.p_late - pt.p1) * g;
      gg += g * g;
    }
    const double a = gg > 0.0 ? yg / gg : 0.0;
    double r = 0.0;
    for (const auto& pt : out.points) {
      const double d = out.p_late - a * std::exp(-pt.delta_t / tau) - pt.p1;
      r += d * d;
    }
    if (amplitude) *amplitude = a;
    return r;
  };
  double lo = std::log(span_lo) - std::log(100.0);
  double hi = std::log(span_hi) + std::log(100.0);
  constexpr int kScan = 200;
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double r = residual(lo + (hi - lo) * k / kScan, nullptr);
    if (r < best_r) {
      best_r = r;
      best = k;
    }
  }
  const double step = (hi - lo) / kScan;
  double a = lo + step * std::max(0, best - 1);
  double b = lo + step * std::min(kScan, best + 1);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double x1 = b - ratio * (b - a);
    const double x2 = a + ratio * (b - a);
    if (residual(x1, nullptr) < residual(x2, nullptr)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  out.tau_fit = std::exp(0.5 * (a + b));
  residual(0.5 * (a + b), &out.fit_amplitude);
  return out;
}

std::size_t required_successes(double target_dp) {
  require(std::isfinite(target_dp) && target_dp > 0.0 && target_dp < 1.0,
          "target accuracy must lie in (0, 1)");
  const double x = (1.3 / target_dp) * (1.3 / target_dp);
  // Guard against 16900.000000000004 style rounding above an integer.
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

std::size_t required_trials(double target_dp, double quantum_efficiency) {
  require(std::isfinite(quantum_efficiency) && quantum_efficiency > 0.0 &&
              quantum_efficiency <= 1.0,
          "quantum efficiency must lie in (0, 1]");
  const double x = static_cast<double>(required_successes(target_dp)) / quantum_efficiency;
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

}  // namespace reductionlab::scenarios
