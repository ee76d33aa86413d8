#include "reductionlab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "numerics.hpp"
#include "reductionlab/diagnostics.hpp"
#include "reductionlab/errors.hpp"

namespace reductionlab::reduction {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

// Integral of the survival-weighted rate over each panel is kept below this.
constexpr double kPanelMass = 0.25;
constexpr int kPanelOrder = 8;
// Survival below this is treated as exhausted.
constexpr double kNegligibleSurvival = 1e-30;

const numerics::GaussRule& unit_rule() {
  static const numerics::GaussRule rule = numerics::gauss_legendre(kPanelOrder, 0.0, 1.0);
  return rule;
}

// Plateau rate carried by each shape: A_s = sum over pairs with shape s of
// E_ij w_j / hbar.
std::vector<double> shape_amplitudes(const Superposition& s, const CouplingProfile& p,
                                     const PhysicalConstants& consts) {
  std::vector<double> a(p.shapes().size(), 0.0);
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !(s.weights[i] > 0.0)) continue;
      a[p.shape_of(i, j)] += s.couplings(i, j) * s.weights[j] / consts.hbar;
    }
  }
  return a;
}

struct Race {
  std::vector<const Shape*> shapes;  // shapes with non-zero amplitude
  std::vector<double> amplitude;

  double total_rate(double t) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < shapes.size(); ++k) sum += amplitude[k] * factor(*shapes[k], t);
    return sum;
  }
};

Race make_race(const Superposition& s, const CouplingProfile& p, const PhysicalConstants& consts) {
  const auto a = shape_amplitudes(s, p, consts);
  Race race;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > 0.0) {
      race.shapes.push_back(&p.shapes()[k]);
      race.amplitude.push_back(a[k]);
    }
  }
  return race;
}

// Walks the race from t_start to horizon. For every quadrature node calls
// visit(t, density) such that the probability of a first trigger of the
// pair (i, j) equals sum density * T_ij(t). Returns survival at the horizon.
double walk_race(const Race& race, double t_start, double horizon,
                 const std::function<void(double, double)>& visit) {
  std::vector<double> cuts{t_start, horizon};
  for (const Shape* shape : race.shapes) {
    for (double b : breakpoints(*shape)) {
      if (b > t_start && b < horizon) cuts.push_back(b);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto& rule = unit_rule();
  double survival = 1.0;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg];
    const double b = cuts[seg + 1];
    const double len = b - a;
    if (len <= 0.0) continue;
    // Sample just inside the segment so steps at the cuts land on the
    // correct side, then extend the line to the endpoints.
    const double delta = 1e-9 * len;
    const double ra = race.total_rate(a + delta);
    const double rb = race.total_rate(b - delta);
    const double la = ra - (rb - ra) * delta / (len - 2.0 * delta);
    const double lb = rb + (rb - ra) * delta / (len - 2.0 * delta);
    const double slope = (lb - la) / len;
    if (std::abs(lb - la) <= 1e-14 * std::max(std::abs(la), std::abs(lb))) {
      // Constant rate: nodes uniform in the event-time CDF.
      const double lambda = 0.5 * (la + lb);
      if (lambda <= 0.0) continue;
      const double span = -std::expm1(-lambda * len);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double v = rule.nodes[q] * span;
        const double t = a - std::log1p(-v) / lambda;
        visit(std::min(t, b), survival * rule.weights[q] * span / lambda);
      }
      survival *= std::exp(-lambda * len);
      if (survival < kNegligibleSurvival) return 0.0;
      continue;
    }
    double u = 0.0;
    while (u < len) {
      const double rate_here = std::max(la + slope * u, 0.0);
      double w = len - u;
      if (rate_here > 0.0) w = std::min(w, kPanelMass / rate_here);
      if (slope > 0.0) w = std::min(w, std::sqrt(2.0 * kPanelMass / slope));
      // Panel-local cumulative hazard: H(x) = rate_here x + slope x^2 / 2.
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = rule.nodes[q] * w;
        const double hazard = rate_here * x + 0.5 * slope * x * x;
        visit(a + u + x, survival * std::exp(-hazard) * rule.weights[q] * w);
      }
      survival *= std::exp(-(rate_here * w + 0.5 * slope * w * w));
      u += w;
      if (survival < kNegligibleSurvival) return 0.0;
    }
  }
  return survival;
}

double resolve_horizon(const Superposition& s, const CouplingProfile& p, const TimedepOptions& opts,
                       const PhysicalConstants& consts) {
  if (opts.horizon) {
    require(std::isfinite(*opts.horizon) && *opts.horizon > opts.t0,
            "horizon must be finite and later than t0");
    return *opts.horizon;
  }
  return default_horizon(s, p, opts.t0, consts);
}

void check_profile(const Superposition& s, const CouplingProfile& p) {
  require(p.size() == s.size(), "profile dimension does not match the superposition");
  p.validate(s.size());
}

std::vector<std::size_t> relabel(const std::vector<std::size_t>& local,
                                 const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (std::size_t k : local) out.push_back(labels[k]);
  std::sort(out.begin(), out.end());
  return out;
}

// Couplings above the zero threshold, as neighbour lists, so that one
// trigger costs time proportional to the edges it touches.
struct Coupled {
  double eps;
  std::vector<std::vector<std::size_t>> adj;

  Coupled(const Superposition& s, double eps_rel)
      : eps(eps_rel * s.max_coupling()), adj(s.size()) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < s.size(); ++b) {
        if (a != b && s.couplings(a, b) > eps) adj[a].push_back(b);
      }
    }
  }
  bool operator()(const Superposition& s, std::size_t a, std::size_t b) const {
    return s.couplings(a, b) > eps;
  }
};

ReductionOutcome trigger(const Superposition& s, const Coupled& coupled, std::size_t i,
                         std::size_t j) {
  const std::size_t n = s.size();
  std::vector<char> survives(n, 0);
  survives[j] = 1;
  for (std::size_t m = 0; m < n; ++m) {
    if (m != i && m != j && s.weights[m] > 0.0 && !coupled(s, m, j)) survives[m] = 1;
  }
  std::vector<double> w(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (survives[m]) w[m] = s.weights[m];
  }
  // States swept into j along with the trigger source.
  for (std::size_t k = 0; k < n; ++k) {
    if (!survives[k] && k != i) w[j] += s.weights[k];
  }
  // The source streams its weight to every survivor it couples to.
  double stream = 0.0;
  for (std::size_t m : coupled.adj[i]) {
    if (survives[m]) stream += s.couplings(i, m) * s.weights[m];
  }
  if (stream > 0.0) {
    for (std::size_t m : coupled.adj[i]) {
      if (survives[m]) w[m] += s.weights[i] * s.couplings(i, m) * s.weights[m] / stream;
    }
  } else {
    w[j] += s.weights[i];
  }

  ReductionOutcome out;
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (!survives[m]) continue;
    out.surviving.push_back(m);
    out.new_weights.push_back(w[m]);
    total += w[m];
  }
  for (double& v : out.new_weights) v /= total;
  out.terminal = true;
  for (std::size_t a : out.surviving) {
    for (std::size_t b : coupled.adj[a]) {
      if (survives[b]) {
        out.terminal = false;
        return out;
      }
    }
  }
  return out;
}

bool has_trigger(const Superposition& s) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && s.couplings(i, j) > 0.0 && s.weights[i] > 0.0 && s.weights[j] > 0.0) {
        return true;
      }
    }
  }
  return false;
}

struct Event {
  std::size_t i = 0;
  std::size_t j = 0;
  double rate = 0.0;  // E_ij w_j (unnormalised)
  ReductionOutcome outcome;
};

std::vector<Event> events_of(const Superposition& s, double eps_rel) {
  const Coupled coupled(s, eps_rel);
  std::vector<Event> events;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s.weights[i] > 0.0)) continue;
    for (std::size_t j : coupled.adj[i]) {
      if (!(s.weights[j] > 0.0)) continue;
      events.push_back({i, j, s.couplings(i, j) * s.weights[j], trigger(s, coupled, i, j)});
    }
  }
  return events;
}

void static_cascade(const Superposition& s, const std::vector<std::size_t>& labels, double mass,
                    double eps_rel, OutcomeDistribution& out) {
  const auto events = events_of(s, eps_rel);
  if (events.empty()) {
    out[labels] += mass;
    return;
  }
  double total = 0.0;
  for (const auto& e : events) total += e.rate;
  for (const auto& e : events) {
    const double p = mass * e.rate / total;
    if (e.outcome.terminal) {
      out[relabel(e.outcome.surviving, labels)] += p;
    } else {
      static_cascade(restrict(s, e.outcome), relabel(e.outcome.surviving, labels), p, eps_rel, out);
    }
  }
}

// The outcome of a trigger is decided by the couplings live at the trigger
// time; couplings that switch on later keep the survivors racing.
// An explicit horizon cuts the whole cascade; without one every race gets
// its own default window from its start time.
void timed_cascade(const Superposition& s, const CouplingProfile& p,
                   const std::vector<std::size_t>& labels, double t_start,
                   std::optional<double> fixed_horizon, double mass,
                   const PhysicalConstants& consts, double eps_rel, OutcomeDistribution& out) {
  const auto events = events_of(s, eps_rel);
  if (events.empty()) {
    out[labels] += mass;
    return;
  }
  const double horizon = fixed_horizon ? *fixed_horizon : default_horizon(s, p, t_start, consts);
  if (t_start >= horizon) {
    out[labels] += mass;
    return;
  }
  const Race race = make_race(s, p, consts);
  const double residual = walk_race(race, t_start, horizon, [&](double t, double density) {
    std::optional<Superposition> eff;
    std::optional<Coupled> live;
    for (const auto& e : events) {
      const double rate = e.rate / consts.hbar * p.factor(e.i, e.j, t);
      if (rate <= 0.0) continue;
      if (!eff) {
        eff = effective_superposition(s, p, t);
        live.emplace(*eff, eps_rel);
      }
      if (!(*live)(*eff, e.i, e.j)) continue;
      const ReductionOutcome outcome = trigger(*eff, *live, e.i, e.j);
      const double prob = mass * density * rate;
      const auto sub_labels = relabel(outcome.surviving, labels);
      const Superposition sub = restrict(s, outcome);
      if (!has_trigger(sub)) {
        out[sub_labels] += prob;
        continue;
      }
      // Walked in time even when proportional: the race may be cut by the
      // horizon.
      timed_cascade(sub, p.restrict(outcome.surviving), sub_labels, t, fixed_horizon, prob,
                    consts, eps_rel, out);
    }
  });
  if (residual > 0.0) out[labels] += mass * residual;
}

}  // namespace

double Superposition::max_coupling() const {
  double m = 0.0;
  for (double v : couplings.data()) m = std::max(m, v);
  return m;
}

void Superposition::validate() const {
  const std::size_t n = weights.size();
  require(n >= 1, "superposition needs at least one state");
  require(couplings.size() == n, "coupling matrix dimension does not match the weights");
  double sum = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "weights must be finite and >= 0");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "weights must sum to 1 within 1e-12");
  const double scale = max_coupling();
  for (std::size_t i = 0; i < n; ++i) {
    require(couplings(i, i) == 0.0, "coupling matrix must have a zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double e = couplings(i, j);
      require(std::isfinite(e) && e >= 0.0, "couplings must be finite and >= 0");
      require(std::abs(e - couplings(j, i)) <= 1e-12 * scale, "coupling matrix must be symmetric");
    }
  }
}

double factor(const Shape& shape, double t) {
  return std::visit(
      [t](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, Ramp>) {
          if (t < v.t_on) return 0.0;
          if (v.t_rise <= 0.0 || t >= v.t_on + v.t_rise) return 1.0;
          return (t - v.t_on) / v.t_rise;
        } else {
          const auto& pts = v.points;
          if (t <= pts.front().first) return pts.front().second;
          if (t >= pts.back().first) return pts.back().second;
          const auto it = std::upper_bound(
              pts.begin(), pts.end(), t,
              [](double x, const std::pair<double, double>& p) { return x < p.first; });
          const auto& hi = *it;
          const auto& lo = *(it - 1);
          return lo.second + (hi.second - lo.second) * (t - lo.first) / (hi.first - lo.first);
        }
      },
      shape);
}

void validate_shape(const Shape& shape) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ramp>) {
          require(std::isfinite(v.t_on) && std::isfinite(v.t_rise) && v.t_rise >= 0.0,
                  "ramp: t_on must be finite and t_rise >= 0");
        } else if constexpr (std::is_same_v<T, Table>) {
          require(!v.points.empty(), "table: needs at least one point");
          for (std::size_t k = 0; k < v.points.size(); ++k) {
            const auto [t, f] = v.points[k];
            require(std::isfinite(t), "table: times must be finite");
            require(std::isfinite(f) && f >= 0.0 && f <= 1.0, "table: factors must lie in [0, 1]");
            if (k > 0) require(t >= v.points[k - 1].first, "table: times must be non-decreasing");
            if (k > 1) {
              require(!(t == v.points[k - 1].first && t == v.points[k - 2].first),
                      "table: at most two points may share a time");
            }
          }
        }
      },
      shape);
}

std::vector<double> breakpoints(const Shape& shape) {
  return std::visit(
      [](const auto& v) -> std::vector<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {};
        } else if constexpr (std::is_same_v<T, Ramp>) {
          if (v.t_rise <= 0.0) return {v.t_on};
          return {v.t_on, v.t_on + v.t_rise};
        } else {
          std::vector<double> out;
          for (const auto& p : v.points) {
            if (out.empty() || out.back() != p.first) out.push_back(p.first);
          }
          return out;
        }
      },
      shape);
}

CouplingProfile CouplingProfile::uniform(std::size_t n, Shape shape) {
  CouplingProfile p;
  p.n_ = n;
  p.shapes_.push_back(std::move(shape));
  p.index_.assign(n * n, 0);
  return p;
}

std::size_t CouplingProfile::add_shape(Shape shape) {
  shapes_.push_back(std::move(shape));
  return shapes_.size() - 1;
}

void CouplingProfile::assign(std::size_t i, std::size_t j, std::size_t shape) {
  require(i < n_ && j < n_, "profile: state index out of range");
  require(shape < shapes_.size(), "profile: shape index out of range");
  index_[i * n_ + j] = shape;
  index_[j * n_ + i] = shape;
}

double CouplingProfile::factor(std::size_t i, std::size_t j, double t) const {
  return reduction::factor(shapes_[index_[i * n_ + j]], t);
}

bool CouplingProfile::single_shape(const Superposition& s) const {
  std::optional<std::size_t> seen;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (s.couplings(i, j) <= 0.0) continue;
      const std::size_t k = shape_of(i, j);
      if (seen && *seen != k) return false;
      seen = k;
    }
  }
  return true;
}

CouplingProfile CouplingProfile::restrict(const std::vector<std::size_t>& states) const {
  CouplingProfile p;
  p.n_ = states.size();
  p.shapes_ = shapes_;
  p.index_.assign(p.n_ * p.n_, 0);
  for (std::size_t a = 0; a < states.size(); ++a) {
    for (std::size_t b = 0; b < states.size(); ++b) {
      p.index_[a * p.n_ + b] = shape_of(states[a], states[b]);
    }
  }
  return p;
}

void CouplingProfile::validate(std::size_t n) const {
  require(n_ == n, "profile dimension does not match the superposition");
  require(!shapes_.empty(), "profile has no shapes");
  for (const auto& s : shapes_) validate_shape(s);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      require(index_[i * n_ + j] < shapes_.size(), "profile: shape index out of range");
      require(index_[i * n_ + j] == index_[j * n_ + i], "profile must be symmetric");
    }
  }
}

SquareMatrix trigger_rate_matrix(const Superposition& s, const PhysicalConstants& consts) {
  s.validate();
  const std::size_t n = s.size();
  SquareMatrix t(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && s.weights[i] > 0.0) t(i, j) = s.couplings(i, j) * s.weights[j] / consts.hbar;
    }
  }
  return t;
}

std::vector<double> state_decay_rates(const Superposition& s, const PhysicalConstants& consts) {
  const SquareMatrix t = trigger_rate_matrix(s, consts);
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) out[i] += t(i, j);
  }
  return out;
}

std::vector<double> reduction_rates(const Superposition& s, const PhysicalConstants& consts) {
  const SquareMatrix t = trigger_rate_matrix(s, consts);
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t i = 0; i < s.size(); ++i) out[j] += t(i, j);
  }
  return out;
}

MeanPotentialRates decay_rate_via_mean_potential(const Superposition& s,
                                                 std::span<const massdist::MassDistribution> dists,
                                                 const massdist::QuadratureConfig& cfg,
                                                 const PhysicalConstants& consts) {
  s.validate();
  const std::size_t n = s.size();
  require(dists.size() == n, "one mass distribution per state is required");
  const std::vector<double> w = massdist::interaction_matrix(dists, cfg, consts);
  const auto at = [&](std::size_t i, std::size_t j) { return w[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double rebuilt = at(i, i) + at(j, j) - 2.0 * at(i, j);
      // The difference cancels self-energies, so the error scales with them.
      const double slack = 5.0 * cfg.rel_tolerance * (std::abs(at(i, i)) + std::abs(at(j, j)));
      if (std::abs(rebuilt - s.couplings(i, j)) > slack) {
        throw ConsistencyError("coupling (" + std::to_string(i + 1) + ", " +
                               std::to_string(j + 1) + ") = " + std::to_string(s.couplings(i, j)) +
                               " J but the distributions give " + std::to_string(rebuilt) + " J");
      }
    }
  }
  MeanPotentialRates out;
  out.exact.assign(n, 0.0);
  out.approximate.assign(n, 0.0);
  double mean_self = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean_self += s.weights[j] * at(j, j);
  for (std::size_t i = 0; i < n; ++i) {
    // With phi_k = -G int rho_k / r: int phi_mean rho_i = -sum_j w_j W_ij.
    double cross = 0.0;
    for (std::size_t j = 0; j < n; ++j) cross += s.weights[j] * at(i, j);
    out.exact[i] = (at(i, i) - cross) + (mean_self - cross);
    out.approximate[i] = 2.0 * (at(i, i) - cross);
    out.exact[i] /= consts.hbar;
    out.approximate[i] /= consts.hbar;
  }
  return out;
}

std::vector<double> static_probabilities(const Superposition& s) {
  s.validate();
  const std::size_t n = s.size();
  std::vector<double> p(n, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (s.weights[i] > 0.0) column += s.couplings(i, j);
    }
    p[j] = column * s.weights[j];
    total += p[j];
  }
  if (!(total > 0.0)) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  for (double& v : p) v /= total;
  return p;
}

double default_horizon(const Superposition& s, const CouplingProfile& p, double t0,
                       const PhysicalConstants& consts) {
  const auto a = shape_amplitudes(s, p, consts);
  double plateau = 0.0;
  for (double v : a) plateau += v;
  if (!(plateau > 0.0)) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  double last = t0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] <= 0.0) continue;
    for (double b : breakpoints(p.shapes()[k])) last = std::max(last, b);
  }
  return last + 20.0 / plateau;
}

EventProbabilities event_probabilities(const Superposition& s, const CouplingProfile& profile,
                                       const TimedepOptions& opts,
                                       const PhysicalConstants& consts) {
  s.validate();
  check_profile(s, profile);
  const double horizon = resolve_horizon(s, profile, opts, consts);
  const Race race = make_race(s, profile, consts);
  if (race.shapes.empty()) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  // Integral of survival * factor per shape; pairs sharing a shape share it.
  std::vector<double> integral(profile.shapes().size(), 0.0);
  const double residual = walk_race(race, opts.t0, horizon, [&](double t, double density) {
    for (std::size_t k = 0; k < integral.size(); ++k) {
      integral[k] += density * factor(profile.shapes()[k], t);
    }
  });
  const std::size_t n = s.size();
  EventProbabilities out{SquareMatrix(n), residual, horizon, false};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out.events(i, j) =
          s.couplings(i, j) * s.weights[j] / consts.hbar * integral[profile.shape_of(i, j)];
    }
  }
  if (residual > opts.residual_threshold) {
    out.short_horizon = true;
    warn("timedep: horizon too short, residual survival " + std::to_string(residual));
  }
  return out;
}

TimedepResult timedep_probabilities(const Superposition& s, const CouplingProfile& profile,
                                    const TimedepOptions& opts,
                                    const PhysicalConstants& consts) {
  const EventProbabilities ev = event_probabilities(s, profile, opts, consts);
  const std::size_t n = s.size();
  TimedepResult out;
  out.probabilities.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) out.probabilities[j] += ev.events(i, j);
  }
  out.residual = ev.residual;
  out.horizon = ev.horizon;
  out.short_horizon = ev.short_horizon;
  return out;
}

ReductionOutcome apply_trigger(const Superposition& s, std::size_t i, std::size_t j,
                               double eps_rel) {
  const std::size_t n = s.size();
  if (i >= n || j >= n || i == j) {
    throw InvalidTriggerError("trigger " + std::to_string(i) + " -> " + std::to_string(j) +
                              " does not name two distinct states");
  }
  const Coupled graph(s, eps_rel);
  if (s.couplings(i, j) <= graph.eps || !(s.weights[i] > 0.0) || !(s.weights[j] > 0.0)) {
    throw InvalidTriggerError("trigger " + std::to_string(i) + " -> " + std::to_string(j) +
                              " has zero rate");
  }
  return trigger(s, graph, i, j);
}

Superposition restrict(const Superposition& s, const ReductionOutcome& outcome) {
  const std::size_t n = outcome.surviving.size();
  const double eps = kDefaultZeroEps * s.max_coupling();
  Superposition sub;
  sub.weights = outcome.new_weights;
  sub.couplings = SquareMatrix(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double e = s.couplings(outcome.surviving[a], outcome.surviving[b]);
      sub.couplings(a, b) = e > eps ? e : 0.0;
    }
  }
  return sub;
}

OutcomeDistribution outcome_distribution(const Superposition& s, double eps_rel) {
  s.validate();
  const auto events = events_of(s, eps_rel);
  if (events.empty()) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  double total = 0.0;
  for (const auto& e : events) total += e.rate;
  OutcomeDistribution out;
  for (const auto& e : events) out[e.outcome.surviving] += e.rate / total;
  return out;
}

OutcomeDistribution cascade_distribution(const Superposition& s, double eps_rel) {
  s.validate();
  if (!has_trigger(s)) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  std::vector<std::size_t> labels(s.size());
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = k;
  OutcomeDistribution out;
  static_cascade(s, labels, 1.0, eps_rel, out);
  return out;
}

OutcomeDistribution cascade_distribution(const Superposition& s, const CouplingProfile& profile,
                                         const TimedepOptions& opts,
                                         const PhysicalConstants& consts, double eps_rel) {
  s.validate();
  check_profile(s, profile);
  if (!has_trigger(s)) {
    throw StableSuperpositionError("no trigger can fire: the superposition is stable");
  }
  if (opts.horizon) {
    require(std::isfinite(*opts.horizon) && *opts.horizon > opts.t0,
            "horizon must be finite and later than t0");
  }
  std::vector<std::size_t> labels(s.size());
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = k;
  OutcomeDistribution out;
  timed_cascade(s, profile, labels, opts.t0, opts.horizon, 1.0, consts, eps_rel, out);
  return out;
}

Superposition effective_superposition(const Superposition& s, const CouplingProfile& profile,
                                      double t) {
  std::vector<double> shape_factor;
  shape_factor.reserve(profile.shapes().size());
  for (const auto& shape : profile.shapes()) shape_factor.push_back(factor(shape, t));
  Superposition eff = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i != j) eff.couplings(i, j) *= shape_factor[profile.shape_of(i, j)];
    }
  }
  return eff;
}

bool can_trigger(const Superposition& s) { return has_trigger(s); }

bool proportional(const Superposition& s, const CouplingProfile& profile) {
  if (!profile.single_shape(s)) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s.couplings(i, j) <= 0.0) continue;
      const Shape& shape = profile.shapes()[profile.shape_of(i, j)];
      const auto b = breakpoints(shape);
      const double late = b.empty() ? 0.0 : b.back() + 1.0;
      return factor(shape, late) > 0.0;
    }
  }
  return true;
}

double two_state_lifetime(double e_g, const PhysicalConstants& consts) {
  require(std::isfinite(e_g) && e_g >= 0.0, "e_g must be finite and >= 0");
  if (e_g == 0.0) return std::numeric_limits<double>::infinity();
  return consts.hbar / e_g;
}

DiscontinuityProbe discontinuity_probe(const SquareMatrix& couplings, double c1sq, double c2sq) {
  require(couplings.size() == 3, "discontinuity_probe needs a 3x3 coupling matrix");
  require(c1sq >= 0.0 && c2sq >= 0.0 && c1sq + c2sq > 0.0, "weights must be >= 0, not both 0");
  Superposition check{{1.0 / 3, 1.0 / 3, 1.0 / 3}, couplings};
  check.weights[2] = 1.0 - check.weights[0] - check.weights[1];
  check.validate();
  const double a = c1sq / (c1sq + c2sq);
  const double b = c2sq / (c1sq + c2sq);
  DiscontinuityProbe out;
  const double p1 = (couplings(1, 0) + couplings(2, 0)) * a;
  const double p2 = (couplings(0, 1) + couplings(2, 1)) * b;
  if (!(p1 + p2 > 0.0)) {
    throw StableSuperpositionError("limit superposition is stable");
  }
  out.limit = {p1 / (p1 + p2), p2 / (p1 + p2), 0.0};
  if (!(couplings(0, 1) > 0.0)) {
    throw StableSuperpositionError("reduced two-state superposition is stable");
  }
  out.reduced = {a, b};
  out.discontinuous = std::abs(out.limit[0] - out.reduced[0]) > 1e-12 ||
                      std::abs(out.limit[1] - out.reduced[1]) > 1e-12;
  return out;
}

}  // namespace reductionlab::reduction
