#pragma once

// Builders for the detector, medium and star experiments, plus the delayed
// detector sweep and the measurement-planning helper.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reductionlab/constants.hpp"
#include "reductionlab/reduction.hpp"

namespace reductionlab::scenarios {

/// Reference probabilities for the outcome sets of a scenario, with a short
/// note on where they come from.
struct Expected {
  reduction::OutcomeDistribution outcomes;
  std::string provenance;
};

struct Scenario {
  std::string name;
  reduction::Superposition superposition;
  reduction::CouplingProfile profile;
  std::optional<Expected> expected;
  std::string notes;

  std::size_t size() const { return superposition.size(); }
  /// Dimensions agree, the superposition is valid and expectations sum to 1.
  void validate() const;
};

/// State k means the particle was recorded by detector k. Detector k changes
/// its mass-density distribution by detector_eg[k] (0 for a conserving
/// detector), and pair (i, j) differs exactly at detectors i and j, so
/// E_ij = detector_eg[i] + detector_eg[j].
Scenario build_detector_network(std::string name, std::vector<double> weights,
                                const std::vector<double>& detector_eg,
                                const reduction::Shape& profile = reduction::Constant{});

/// Every detector changes its distribution: all couplings 2 e_plateau.
Scenario build_fig3a(std::size_t n_detectors, double e_plateau,
                     const reduction::Shape& profile = reduction::Constant{});

/// Only detector 1 changes its distribution: E_1j = e_plateau, others 0.
Scenario build_fig3b(std::size_t n_detectors, double e_plateau,
                     const reduction::Shape& profile = reduction::Constant{});

/// States: detected at 1, detected at 2, not detected. Both detectors see
/// the particle in states 1 and 2, so E_12 = 2e while E_13 = E_23 = e.
Scenario build_two_detector_overlap(double c1sq, double c2sq, double e_plateau);

/// A medium of n equal cells; weights need not be normalised.
Scenario build_continuous_medium(std::size_t n_cells, std::vector<double> weight_profile,
                                 double e_plateau);

enum class StarCenter { original, mutant };

/// n_mutants + 1 states; state 0 is the original. Only the centre couples.
Scenario build_biology_star(std::size_t n_mutants, double c1sq, StarCenter center,
                            double e_plateau);

/// Exact star result p(center) = k w_c / (k w_c + 1 - w_c), k = number of
/// states other than the centre.
double star_center_probability(std::size_t k, double w_center);
/// Large-n forms for the centre at the original and at one mutant.
double star_original_asymptotic(std::size_t n_mutants, double c1sq);
double star_mutant_asymptotic(double c1sq);

struct SweepPoint {
  double delta_t = 0.0;
  double p1 = 0.0;     // probability that state 1 is the outcome
  double exact = 0.0;  // closed-form race for a step switch-on
};

struct DelayedSweep {
  std::vector<SweepPoint> points;
  double p_immediate = 0.0;  // 1/n
  double p_late = 0.0;       // 0.5
  double tau_fit = 0.0;      // fitted knee of p1(delta_t)
  double fit_amplitude = 0.0;
  double tau_reference = 0.0;  // hbar / sum_ij E_ij w_j of the base scenario
};

/// Scenario where the conserving detectors of `base` start changing their
/// distribution delta_t after the particle arrives.
Scenario delayed_detector_scenario(const Scenario& base, double delta_t);

/// p1 for each delay via the time-dependent cascade, and a least-squares
/// fit of p_late - A exp(-delta_t / tau).
DelayedSweep delayed_detector_sweep(const Scenario& base, const std::vector<double>& delta_ts,
                                    const PhysicalConstants& consts = {});

/// Successful measurements for an accuracy dp are ceil((1.3 / dp)^2); the
/// total divides by the detection efficiency.
std::size_t required_successes(double target_dp);
std::size_t required_trials(double target_dp, double quantum_efficiency);

}  // namespace reductionlab::scenarios
