#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "reductionlab/errors.hpp"
#include "reductionlab/montecarlo.hpp"
#include "reductionlab/reduction.hpp"
#include "support.hpp"

using namespace reductionlab;
using namespace reductionlab::montecarlo;
using reduction::CouplingProfile;
using reduction::Ramp;
using reduction::Superposition;
using testing::kE;
using testing::make_superposition;

namespace {

const double kHbar = PhysicalConstants{}.hbar;

Superposition fig3a() {
  return make_superposition({0.25, 0.25, 0.25, 0.25},
                            {{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}});
}

Superposition fig3b() {
  return make_superposition({0.25, 0.25, 0.25, 0.25},
                            {{0, 1, 1, 1}, {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}});
}

double sigma(double p, std::size_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("generator") {
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    Rng a(42, 7);
    Rng b(42, 7);
    Rng c(42, 8);
    Rng d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int k = 0; k < 100; ++k) {
      const auto x = a.next();
      CHECK(x == b.next());
      same_c += x == c.next();
      same_d += x == d.next();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
    Rng u(1, 1);
    double mean = 0.0;
    for (int k = 0; k < 100000; ++k) {
      const double x = u.uniform();
      REQUIRE(x >= 0.0);
      REQUIRE(x < 1.0);
      mean += x;
    }
    CHECK(std::abs(mean / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
    CHECK(std::string(Rng::kId) == "splitmix64-ctr/v1");
  }

  TEST_CASE("config validation") {
    TrialConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_trials = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.horizon = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.thinning_bound_factor = 0.5;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
  }

  TEST_CASE("constant rates: pair frequencies follow the rate ratios") {
    const auto s = make_superposition({0.25, 0.25, 0.5}, {{0, 2, 1}, {2, 0, 1}, {1, 1, 0}});
    const auto rates = reduction::trigger_rate_matrix(s);
    double total = 0.0;
    for (double r : rates.data()) total += r;
    const auto profile = CouplingProfile::uniform(3);
    const std::size_t n = 100000;
    std::vector<std::size_t> counts(9, 0);
    for (std::size_t k = 0; k < n; ++k) {
      Rng rng(3, k);
      const auto t = sample_first_trigger(s, profile, 0.0, 1e3 / total, rng);
      REQUIRE(t.has_value());
      ++counts[t->i * 3 + t->j];
    }
    for (std::size_t k = 0; k < 9; ++k) {
      const double p = rates.data()[k] / total;
      CAPTURE(k);
      if (p == 0.0) {
        CHECK(counts[k] == 0);
      } else {
        CHECK(std::abs(counts[k] / double(n) - p) < 4 * sigma(p, n));
      }
    }
  }

  TEST_CASE("constant rates: waiting times are exponential") {
    const auto s = fig3b();
    double total = 0.0;
    const auto rate_matrix = reduction::trigger_rate_matrix(s);
    for (double r : rate_matrix.data()) total += r;
    const auto profile = CouplingProfile::uniform(4);
    const std::size_t n = 100000;
    std::vector<double> times;
    times.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      Rng rng(17, k);
      const auto t = sample_first_trigger(s, profile, 0.0, 1e3 / total, rng);
      REQUIRE(t.has_value());
      times.push_back(t->t);
    }
    std::sort(times.begin(), times.end());
    double ks = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double cdf = 1.0 - std::exp(-total * times[k]);
      ks = std::max({ks, std::abs(cdf - double(k) / n), std::abs(cdf - double(k + 1) / n)});
    }
    // Kolmogorov-Smirnov critical value at the 1% level.
    CHECK(ks < 1.628 / std::sqrt(double(n)));
  }

  TEST_CASE("no events before a ramp switches on") {
    const auto s = fig3a();
    const double t_on = 5e-9;
    const auto profile = CouplingProfile::uniform(4, Ramp{t_on, 2e-9});
    for (std::size_t k = 0; k < 20000; ++k) {
      Rng rng(5, k);
      const auto t = sample_first_trigger(s, profile, 0.0, 1e-6, rng);
      REQUIRE(t.has_value());
      REQUIRE(t->t > t_on);
    }
  }

  TEST_CASE("nothing fires before a short horizon or in a stable superposition") {
    const auto s = fig3a();
    const auto profile = CouplingProfile::uniform(4, Ramp{5e-9, 0.0});
    Rng rng(1, 1);
    CHECK_FALSE(sample_first_trigger(s, profile, 0.0, 4e-9, rng).has_value());
    const auto stable = make_superposition({0.5, 0.5}, {{0, 0}, {0, 0}});
    CHECK_FALSE(
        sample_first_trigger(stable, CouplingProfile::uniform(2), 0.0, 1.0, rng).has_value());
    TrialConfig c;
    const auto r = run_cascade_trial(stable, CouplingProfile::uniform(2), c, 0);
    CHECK_FALSE(r.fired);
    CHECK(r.surviving == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("thinning acceptance equals the mean rate over the bound") {
    const auto s = fig3b();
    double plateau = 0.0;
    const auto rate_matrix = reduction::trigger_rate_matrix(s);
    for (double r : rate_matrix.data()) plateau += r;
    for (double factor : {1.0, 2.5}) {
      CAPTURE(factor);
      const double t_on = 2e4 / plateau;
      const double t_rise = 4e4 / plateau;
      const double horizon = 1e5 / plateau;
      const auto profile = CouplingProfile::uniform(4, Ramp{t_on, t_rise});
      Rng rng(9, 0);
      const ThinningStats st = thinning_run(s, profile, 0.0, horizon, rng, {}, factor);
      const double mean_rate = plateau * (horizon - t_on - 0.5 * t_rise) / horizon;
      const double expected = mean_rate / (plateau * factor);
      CHECK(st.proposals > 10000);
      CHECK(std::abs(st.acceptance() / expected - 1.0) < 0.02);
    }
  }

  TEST_CASE("cascade trials land on the paper's outcomes") {
    TrialConfig c;
    c.seed = 2;
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t k = 0; k < 2000; ++k) {
      const auto a = run_cascade_trial(fig3a(), CouplingProfile::uniform(4), c, k);
      CHECK(a.fired);
      CHECK(a.surviving.size() == 1);
      const auto b = run_cascade_trial(fig3b(), CouplingProfile::uniform(4), c, k);
      seen.insert(b.surviving);
    }
    CHECK(seen == std::set<std::vector<std::size_t>>{{0}, {1, 2, 3}});
  }

  TEST_CASE("trials do not depend on execution order") {
    TrialConfig c;
    c.seed = 77;
    const auto s = make_superposition({0.25, 0.25, 0.25, 0.25},
                                      {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
    const auto p = CouplingProfile::uniform(4);
    const auto late = run_cascade_trial(s, p, c, 999);
    for (std::size_t k = 0; k < 50; ++k) (void)run_cascade_trial(s, p, c, k);
    CHECK(run_cascade_trial(s, p, c, 999).surviving == late.surviving);
  }

  TEST_CASE("fig 3b estimate") {
    TrialConfig c;
    c.seed = 42;
    c.n_trials = 100000;
    const auto est = estimate(fig3b(), CouplingProfile::uniform(4), c);
    CHECK(est.n_trials == 100000);
    CHECK(est.n_no_event == 0);
    CHECK(est.rng_id == "splitmix64-ctr/v1");
    const auto& one = est.outcomes.at({0});
    CHECK(one.standard_error == rel(sigma(one.probability, 100000)));
    CHECK(one.standard_error == rel(1.58e-3, 1e-2));
    CHECK(std::abs(one.probability - 0.5) < 3 * one.standard_error);
    double sum = 0.0;
    for (const auto& [k, o] : est.outcomes) sum += o.probability;
    CHECK(sum == rel(1.0));
  }

  TEST_CASE("estimates match the closed forms") {
    TrialConfig c;
    c.seed = 8;
    c.n_trials = 100000;
    const auto four = make_superposition({0.4, 0.3, 0.2, 0.1},
                                         {{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}});
    const auto e4 = estimate(four, CouplingProfile::uniform(4), c);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& o = e4.outcomes.at({k});
      CHECK(std::abs(o.probability - four.weights[k]) < 3 * o.standard_error);
    }
    const auto three = make_superposition({0.25, 0.25, 0.5}, {{0, 2, 1}, {2, 0, 1}, {1, 1, 0}});
    const auto e3 = estimate(three, CouplingProfile::uniform(3), c);
    const std::vector<double> expected{0.3, 0.3, 0.4};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& o = e3.outcomes.at({k});
      CHECK(std::abs(o.probability - expected[k]) < 3 * o.standard_error);
    }
  }

  TEST_CASE("a horizon cut leaves undecided trials as no-event") {
    TrialConfig c;
    c.seed = 4;
    c.n_trials = 20000;
    const auto s = make_superposition({0.5, 0.5}, {{0, 1}, {1, 0}});
    const double rate = kE / kHbar;
    c.horizon = 1.0 / rate;
    const auto est = estimate(s, CouplingProfile::uniform(2), c);
    const double survive = std::exp(-1.0);
    const double frac = est.n_no_event / double(c.n_trials);
    CHECK(std::abs(frac - survive) < 4 * sigma(survive, c.n_trials));
    double sum = frac;
    for (const auto& [k, o] : est.outcomes) sum += o.probability;
    CHECK(sum == rel(1.0));
  }

  TEST_CASE("estimates are identical across thread counts") {
    const auto s = make_superposition({0.25, 0.25, 0.25, 0.25},
                                      {{0, 1, 0, 2}, {1, 0, 1, 0}, {0, 1, 0, 1}, {2, 0, 1, 0}});
    auto profile = CouplingProfile::uniform(4);
    profile.assign(0, 3, profile.add_shape(Ramp{1e-9, 1e-9}));
    TrialConfig c;
    c.seed = 123;
    c.n_trials = 30000;
    const auto one = estimate(s, profile, c);
    c.threads = 3;
    const auto three = estimate(s, profile, c);
    c.threads = 8;
    const auto eight = estimate(s, profile, c);
    REQUIRE(one.outcomes.size() == three.outcomes.size());
    for (const auto& [k, o] : one.outcomes) {
      CHECK(three.outcomes.at(k).count == o.count);
      CHECK(eight.outcomes.at(k).count == o.count);
      CHECK(three.outcomes.at(k).probability == o.probability);
    }
    CHECK(one.n_no_event == three.n_no_event);
  }

  TEST_CASE("time-dependent cascade agrees with the closed form") {
    const auto s = make_superposition({0.25, 0.25, 0.25, 0.25},
                                      {{0, 1, 0, 2}, {1, 0, 1, 0}, {0, 1, 0, 1}, {2, 0, 1, 0}});
    auto profile = CouplingProfile::uniform(4);
    profile.assign(0, 3, profile.add_shape(Ramp{2e-9, 3e-9}));
    TrialConfig c;
    c.seed = 31;
    c.n_trials = 100000;
    const auto est = estimate(s, profile, c);
    const auto exact = reduction::cascade_distribution(s, profile);
    for (const auto& [set, p] : exact) {
      CAPTURE(set.size());
      const auto it = est.outcomes.find(set);
      const double q = it == est.outcomes.end() ? 0.0 : it->second.probability;
      CHECK(std::abs(q - p) < 4 * sigma(std::max(p, 1e-5), c.n_trials) + 1e-5);
    }
  }
}
