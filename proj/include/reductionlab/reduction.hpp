#pragma once

// Trigger-race model of state reduction. Every ordered pair (i, j) of
// coupled states fires trigger events at rate E_ij |c_j|^2 / hbar; the first
// event decides which states survive.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "reductionlab/constants.hpp"
#include "reductionlab/massdist.hpp"

namespace reductionlab::reduction {

/// Dense row-major square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& data() const { return a_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// n states with weights |c_i|^2 and a symmetric coupling matrix E_G(i, j) in J.
struct Superposition {
  std::vector<double> weights;
  SquareMatrix couplings;

  std::size_t size() const { return weights.size(); }
  double max_coupling() const;

  /// Throws InvalidInput on a violated invariant.
  void validate() const;
};

struct Constant {};

/// Linear rise from 0 at t_on to 1 at t_on + t_rise (a step when t_rise = 0).
struct Ramp {
  double t_on = 0.0;
  double t_rise = 0.0;
};

/// Piecewise-linear factor through (t, factor) points, held constant
/// outside the table. Times are non-decreasing; a repeated time encodes a
/// jump, and the later point applies from that time on.
struct Table {
  std::vector<std::pair<double, double>> points;
};

using Shape = std::variant<Constant, Ramp, Table>;

double factor(const Shape& shape, double t);
void validate_shape(const Shape& shape);

/// Times where the shape changes slope.
std::vector<double> breakpoints(const Shape& shape);

/// Time dependence of every coupling: pair (i, j) follows shapes[shape_of(i, j)].
class CouplingProfile {
 public:
  CouplingProfile() = default;

  /// Every pair follows the same shape.
  static CouplingProfile uniform(std::size_t n, Shape shape = Constant{});

  std::size_t size() const { return n_; }
  const std::vector<Shape>& shapes() const { return shapes_; }
  std::size_t shape_of(std::size_t i, std::size_t j) const { return index_[i * n_ + j]; }

  /// Adds a shape and returns its index.
  std::size_t add_shape(Shape shape);
  /// Assigns a shape to the unordered pair {i, j}.
  void assign(std::size_t i, std::size_t j, std::size_t shape);

  double factor(std::size_t i, std::size_t j, double t) const;

  /// True when every coupled pair uses the same shape.
  bool single_shape(const Superposition& s) const;

  /// Profile restricted to the given states, in that order.
  CouplingProfile restrict(const std::vector<std::size_t>& states) const;

  void validate(std::size_t n) const;

 private:
  std::size_t n_ = 0;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> index_;
};

/// T_ij = E_ij |c_j|^2 / hbar. A state with zero weight is absent from the
/// superposition and emits no triggers, so row i vanishes when c_i = 0.
SquareMatrix trigger_rate_matrix(const Superposition& s, const PhysicalConstants& consts = {});

/// Row sums of the trigger matrix: rate at which state i decays.
std::vector<double> state_decay_rates(const Superposition& s, const PhysicalConstants& consts = {});

/// Column sums: rate of trigger events that select state j.
std::vector<double> reduction_rates(const Superposition& s, const PhysicalConstants& consts = {});

struct MeanPotentialRates {
  /// Energy of state i in the mean potential against its own, both cross
  /// terms kept; equals state_decay_rates when the couplings match dists.
  std::vector<double> exact;
  /// Twice the first bracket alone, valid when self-energies agree.
  std::vector<double> approximate;
};

/// Decay rates (1/s) rebuilt from the mass distributions realising each
/// state. Throws ConsistencyError when a coupling disagrees with its
/// distributions by more than the quadrature tolerance allows.
MeanPotentialRates decay_rate_via_mean_potential(
    const Superposition& s, std::span<const massdist::MassDistribution> dists,
    const massdist::QuadratureConfig& cfg = {}, const PhysicalConstants& consts = {});

/// p_j proportional to (sum_i E_ij) |c_j|^2. Throws StableSuperpositionError
/// when no trigger can fire.
std::vector<double> static_probabilities(const Superposition& s);

struct TimedepOptions {
  double t0 = 0.0;
  /// Defaults to the last profile breakpoint plus 20 / (plateau total rate).
  std::optional<double> horizon;
  /// Residual survival above this raises a warning and sets short_horizon.
  double residual_threshold = 1e-6;
};

struct EventProbabilities {
  SquareMatrix events;      // probability that i -> j is the first trigger
  double residual = 0.0;    // probability that nothing fires before the horizon
  double horizon = 0.0;
  bool short_horizon = false;
};

/// First-trigger probabilities of the time-dependent race, with exact
/// exponential survival over each piecewise-linear rate segment.
EventProbabilities event_probabilities(const Superposition& s, const CouplingProfile& profile,
                                       const TimedepOptions& opts = {},
                                       const PhysicalConstants& consts = {});

struct TimedepResult {
  std::vector<double> probabilities;
  double residual = 0.0;
  double horizon = 0.0;
  bool short_horizon = false;
};

TimedepResult timedep_probabilities(const Superposition& s, const CouplingProfile& profile,
                                    const TimedepOptions& opts = {},
                                    const PhysicalConstants& consts = {});

double default_horizon(const Superposition& s, const CouplingProfile& profile, double t0,
                       const PhysicalConstants& consts = {});

struct ReductionOutcome {
  std::vector<std::size_t> surviving;  // ascending state indices
  std::vector<double> new_weights;     // aligned with surviving
  bool terminal = false;
};

/// Couplings at or below eps_rel * max entry count as zero.
inline constexpr double kDefaultZeroEps = 1e-12;

/// Outcome of trigger i -> j: j survives with every state not coupled to it.
ReductionOutcome apply_trigger(const Superposition& s, std::size_t i, std::size_t j,
                               double eps_rel = kDefaultZeroEps);

/// Sub-superposition over the surviving states.
Superposition restrict(const Superposition& s, const ReductionOutcome& outcome);

using OutcomeDistribution = std::map<std::vector<std::size_t>, double>;

/// One trigger event, probabilities proportional to E_ij |c_j|^2, merged by
/// surviving set.
OutcomeDistribution outcome_distribution(const Superposition& s, double eps_rel = kDefaultZeroEps);

/// Repeats the race on non-terminal outcomes until every branch is terminal.
OutcomeDistribution cascade_distribution(const Superposition& s, double eps_rel = kDefaultZeroEps);

/// Time-dependent variant: later races start at the time of the previous
/// event. An explicit horizon cuts the whole cascade; by default each race
/// gets default_horizon from its own start. Mass left when a race runs out
/// stays on the current set.
OutcomeDistribution cascade_distribution(const Superposition& s, const CouplingProfile& profile,
                                         const TimedepOptions& opts = {},
                                         const PhysicalConstants& consts = {},
                                         double eps_rel = kDefaultZeroEps);

/// True when every coupled pair follows one shape that ends switched on, so
/// outcome ratios do not depend on time.
bool proportional(const Superposition& s, const CouplingProfile& profile);

/// Couplings scaled by their profile factors at time t.
Superposition effective_superposition(const Superposition& s, const CouplingProfile& profile,
                                      double t);

/// True when at least one trigger has a non-zero plateau rate.
bool can_trigger(const Superposition& s);

/// hbar / e_g; +infinity for a stable superposition (e_g = 0).
double two_state_lifetime(double e_g, const PhysicalConstants& consts = {});

struct DiscontinuityProbe {
  std::vector<double> limit;    // static probabilities as |c_3|^2 -> 0
  std::vector<double> reduced;  // two-state result for states 1 and 2
  bool discontinuous = false;
};

/// Compares the |c_3|^2 -> 0 limit of a three-state superposition with the
/// two-state superposition obtained by dropping state 3. c1sq and c2sq are
/// the weights of states 1 and 2 along the path (renormalised).
DiscontinuityProbe discontinuity_probe(const SquareMatrix& couplings, double c1sq, double c2sq);

}  // namespace reductionlab::reduction
