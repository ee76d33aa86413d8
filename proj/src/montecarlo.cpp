#include "reductionlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <variant>

#include "reductionlab/errors.hpp"

namespace reductionlab::montecarlo {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

using reduction::CouplingProfile;
using reduction::Superposition;

double plateau_rate(const Superposition& s, const PhysicalConstants& consts) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i != j && s.weights[i] > 0.0) total += s.couplings(i, j) * s.weights[j];
    }
  }
  return total / consts.hbar;
}

// Instantaneous per-pair rates, flattened row-major; returns the total.
double pair_rates(const Superposition& s, const CouplingProfile& p, double t,
                  const PhysicalConstants& consts, std::vector<double>& rates) {
  const std::size_t n = s.size();
  rates.assign(n * n, 0.0);
  // Few shapes, many pairs: evaluate each shape once.
  std::vector<double> shape_factor;
  shape_factor.reserve(p.shapes().size());
  for (const auto& shape : p.shapes()) shape_factor.push_back(reduction::factor(shape, t));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s.weights[i] > 0.0)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double e = s.couplings(i, j);
      if (e <= 0.0 || !(s.weights[j] > 0.0)) continue;
      const double r = e * s.weights[j] / consts.hbar * shape_factor[p.shape_of(i, j)];
      rates[i * n + j] = r;
      total += r;
    }
  }
  return total;
}

std::vector<std::size_t> relabel(const std::vector<std::size_t>& local,
                                 const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (std::size_t k : local) out.push_back(labels[k]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t trial_index)
    : key_(splitmix64(seed ^ splitmix64(trial_index + kGolden))) {}

std::uint64_t Rng::next() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log1p(-uniform()); }

void TrialConfig::validate() const {
  if (n_trials < 1) throw InvalidInput("n_trials must be >= 1");
  if (horizon && !(std::isfinite(*horizon) && *horizon > t0)) {
    throw InvalidInput("horizon must be finite and later than t0");
  }
  if (!(thinning_bound_factor >= 1.0) || !std::isfinite(thinning_bound_factor)) {
    throw InvalidInput("thinning_bound_factor must be >= 1");
  }
  if (!std::isfinite(t0)) throw InvalidInput("t0 must be finite");
  if (threads < 1) throw InvalidInput("threads must be >= 1");
}

namespace {

// Everything about one race that does not depend on the trial: the
// thinning bound and, when no coupling changes with time, the cumulative
// pair rates so a proposal costs a lookup instead of a full rate pass.
struct Race {
  const Superposition* s = nullptr;
  const CouplingProfile* profile = nullptr;
  double bound = 0.0;
  bool frozen = false;
  std::vector<double> cumulative;

  Race(const Superposition& sup, const CouplingProfile& p, double bound_factor,
       const PhysicalConstants& consts)
      : s(&sup), profile(&p), bound(plateau_rate(sup, consts) * bound_factor) {
    frozen = std::all_of(p.shapes().begin(), p.shapes().end(), [](const reduction::Shape& sh) {
      return std::holds_alternative<reduction::Constant>(sh);
    });
    if (frozen) {
      pair_rates(sup, p, 0.0, consts, cumulative);
      for (std::size_t k = 1; k < cumulative.size(); ++k) cumulative[k] += cumulative[k - 1];
    }
  }
};

std::optional<Trigger> sample(const Race& race, double t0, double horizon, Rng& rng,
                              const PhysicalConstants& consts, std::vector<double>& rates,
                              ThinningStats* stats) {
  if (!(race.bound > 0.0)) return std::nullopt;
  const std::size_t n = race.s->size();
  double t = t0;
  for (;;) {
    t += rng.exponential() / race.bound;
    if (t >= horizon) return std::nullopt;
    const double total = race.frozen ? race.cumulative.back()
                                     : pair_rates(*race.s, *race.profile, t, consts, rates);
    if (stats) ++stats->proposals;
    if (rng.uniform() * race.bound >= total) continue;
    if (stats) ++stats->accepted;
    // Pick the pair in proportion to its instantaneous rate.
    double target = rng.uniform() * total;
    if (race.frozen) {
      const auto& c = race.cumulative;
      auto it = std::upper_bound(c.begin(), c.end(), target);
      if (it == c.end()) it = std::lower_bound(c.begin(), c.end(), c.back());
      const auto k = static_cast<std::size_t>(it - c.begin());
      return Trigger{t, k / n, k % n};
    }
    std::size_t last = 0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      if (rates[k] <= 0.0) continue;
      last = k;
      if (target < rates[k]) return Trigger{t, k / n, k % n};
      target -= rates[k];
    }
    return Trigger{t, last / n, last % n};
  }
}

}  // namespace

std::optional<Trigger> sample_first_trigger(const Superposition& s, const CouplingProfile& profile,
                                            double t0, double horizon, Rng& rng,
                                            const PhysicalConstants& consts, double bound_factor,
                                            ThinningStats* stats) {
  std::vector<double> rates;
  return sample(Race(s, profile, bound_factor, consts), t0, horizon, rng, consts, rates, stats);
}

ThinningStats thinning_run(const Superposition& s, const CouplingProfile& profile, double t0,
                           double horizon, Rng& rng, const PhysicalConstants& consts,
                           double bound_factor) {
  ThinningStats stats;
  const double bound = plateau_rate(s, consts) * bound_factor;
  if (!(bound > 0.0)) return stats;
  std::vector<double> rates;
  for (double t = t0 + rng.exponential() / bound; t < horizon; t += rng.exponential() / bound) {
    ++stats.proposals;
    if (rng.uniform() * bound < pair_rates(s, profile, t, consts, rates)) ++stats.accepted;
  }
  return stats;
}

namespace {

// Same horizon rule as the exact cascade: a fixed horizon cuts every race,
// otherwise each race gets its own default window from its start.
// The first race is shared by every trial and comes prebuilt.
TrialResult run_trial(const Race& first_race, std::optional<double> fixed_horizon,
                      double first_horizon, double t0, double bound_factor, Rng& rng,
                      const PhysicalConstants& consts) {
  const Superposition& s = *first_race.s;
  const CouplingProfile& profile = *first_race.profile;
  std::vector<double> scratch;
  std::vector<std::size_t> labels(s.size());
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = k;
  TrialResult result;

  auto trig = sample(first_race, t0, first_horizon, rng, consts, scratch, nullptr);
  if (!trig) {
    result.surviving = labels;
    return result;
  }
  result.fired = true;
  Superposition current;
  CouplingProfile current_profile;
  const Superposition* cur = &s;
  const CouplingProfile* cur_profile = &profile;
  bool frozen = first_race.frozen;
  for (;;) {
    // Constant shapes leave the couplings as they are.
    const auto outcome =
        frozen ? reduction::apply_trigger(*cur, trig->i, trig->j)
               : reduction::apply_trigger(
                     reduction::effective_superposition(*cur, *cur_profile, trig->t), trig->i,
                     trig->j);
    labels = relabel(outcome.surviving, labels);
    if (outcome.terminal && frozen) break;
    Superposition next = reduction::restrict(*cur, outcome);
    CouplingProfile next_profile = cur_profile->restrict(outcome.surviving);
    current = std::move(next);
    current_profile = std::move(next_profile);
    cur = &current;
    cur_profile = &current_profile;
    if (!reduction::can_trigger(current)) break;
    const double horizon =
        fixed_horizon ? *fixed_horizon
                      : reduction::default_horizon(current, current_profile, trig->t, consts);
    const Race race(current, current_profile, bound_factor, consts);
    frozen = race.frozen;
    trig = sample(race, trig->t, horizon, rng, consts, scratch, nullptr);
    if (!trig) break;
  }
  result.surviving = labels;
  return result;
}

double resolve_horizon(const Superposition& s, const CouplingProfile& profile,
                       const TrialConfig& config, const PhysicalConstants& consts) {
  if (config.horizon) return *config.horizon;
  if (!reduction::can_trigger(s)) return config.t0;
  return reduction::default_horizon(s, profile, config.t0, consts);
}

void check(const Superposition& s, const CouplingProfile& profile, const TrialConfig& config) {
  config.validate();
  s.validate();
  if (profile.size() != s.size()) {
    throw InvalidInput("profile dimension does not match the superposition");
  }
  profile.validate(s.size());
}

}  // namespace

TrialResult run_cascade_trial(const Superposition& s, const CouplingProfile& profile,
                              const TrialConfig& config, std::uint64_t trial_index,
                              const PhysicalConstants& consts) {
  check(s, profile, config);
  Rng rng(config.seed, trial_index);
  const Race race(s, profile, config.thinning_bound_factor, consts);
  return run_trial(race, config.horizon, resolve_horizon(s, profile, config, consts), config.t0,
                   config.thinning_bound_factor, rng, consts);
}

McEstimate estimate(const Superposition& s, const CouplingProfile& profile,
                    const TrialConfig& config, const PhysicalConstants& consts) {
  check(s, profile, config);
  const double horizon = resolve_horizon(s, profile, config, consts);
  const Race race(s, profile, config.thinning_bound_factor, consts);
  using Counts = std::map<std::vector<std::size_t>, std::size_t>;

  const std::size_t workers =
      std::min<std::size_t>(config.threads, std::max<std::size_t>(1, config.n_trials / 64));
  std::vector<Counts> counts(workers);
  std::vector<std::size_t> no_event(workers, 0);
  const auto work = [&](std::size_t w) {
    const std::size_t begin = config.n_trials * w / workers;
    const std::size_t end = config.n_trials * (w + 1) / workers;
    for (std::size_t k = begin; k < end; ++k) {
      Rng rng(config.seed, k);
      const TrialResult r = run_trial(race, config.horizon, horizon, config.t0,
                                      config.thinning_bound_factor, rng, consts);
      if (r.fired) {
        ++counts[w][r.surviving];
      } else {
        ++no_event[w];
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  McEstimate out;
  out.n_trials = config.n_trials;
  out.horizon = horizon;
  for (std::size_t w = 0; w < workers; ++w) {
    out.n_no_event += no_event[w];
    for (const auto& [key, c] : counts[w]) out.outcomes[key].count += c;
  }
  const double n = static_cast<double>(config.n_trials);
  for (auto& [key, e] : out.outcomes) {
    e.probability = static_cast<double>(e.count) / n;
    e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) / n);
  }
  return out;
}

}  // namespace reductionlab::montecarlo
