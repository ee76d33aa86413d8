#pragma once

// Stochastic counterpart of the reduction module: the trigger race is run as
// competing inhomogeneous Poisson processes sampled by thinning.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reductionlab/constants.hpp"
#include "reductionlab/reduction.hpp"

namespace reductionlab::montecarlo {

/// Counter-based generator. Trial k of seed s owns the key
/// splitmix64(s ^ splitmix64(k + golden)); draw d of that trial is
/// splitmix64(key + (d + 1) * golden). Streams never depend on scheduling.
class Rng {
 public:
  static constexpr const char* kId = "splitmix64-ctr/v1";

  Rng(std::uint64_t seed, std::uint64_t trial_index);

  std::uint64_t next();
  double uniform();      // [0, 1), 53 bits
  double exponential();  // mean 1

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

struct TrialConfig {
  std::uint64_t seed = 0;
  std::size_t n_trials = 100000;
  /// Cut-off for every race of a cascade. Unset gives each race the
  /// reduction module's default horizon from its own start time.
  std::optional<double> horizon;
  double thinning_bound_factor = 1.0;
  double t0 = 0.0;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;

  void validate() const;
};

struct ThinningStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;

  double acceptance() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

struct Trigger {
  double t = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

/// First trigger after t0, or nothing when none fires before the horizon or
/// the superposition is stable.
std::optional<Trigger> sample_first_trigger(const reduction::Superposition& s,
                                            const reduction::CouplingProfile& profile, double t0,
                                            double horizon, Rng& rng,
                                            const PhysicalConstants& consts = {},
                                            double bound_factor = 1.0,
                                            ThinningStats* stats = nullptr);

/// Runs the thinning process over the whole window without stopping at the
/// first acceptance; used to check the acceptance rate.
ThinningStats thinning_run(const reduction::Superposition& s,
                           const reduction::CouplingProfile& profile, double t0, double horizon,
                           Rng& rng, const PhysicalConstants& consts = {},
                           double bound_factor = 1.0);

struct TrialResult {
  std::vector<std::size_t> surviving;  // ascending, 0-based
  bool fired = false;                  // at least one trigger happened
};

TrialResult run_cascade_trial(const reduction::Superposition& s,
                              const reduction::CouplingProfile& profile,
                              const TrialConfig& config, std::uint64_t trial_index,
                              const PhysicalConstants& consts = {});

struct OutcomeEstimate {
  std::size_t count = 0;
  double probability = 0.0;
  double standard_error = 0.0;
};

struct McEstimate {
  std::map<std::vector<std::size_t>, OutcomeEstimate> outcomes;
  std::size_t n_trials = 0;
  std::size_t n_no_event = 0;  // nothing fired before the horizon
  double horizon = 0.0;  // horizon of the first race
  std::string rng_id = Rng::kId;
};

McEstimate estimate(const reduction::Superposition& s, const reduction::CouplingProfile& profile,
                    const TrialConfig& config, const PhysicalConstants& consts = {});

}  // namespace reductionlab::montecarlo
