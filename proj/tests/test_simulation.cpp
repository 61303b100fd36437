#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chainbinom/errors.hpp"
#include "chainbinom/model_core.hpp"
#include "chainbinom/simulation.hpp"
#include "oracles.hpp"

using namespace chainbinom;

namespace {

std::vector<double> empirical_totals(const HouseholdConfig& c, Horizon h, int draws, Rng& rng) {
  std::vector<double> freq(c.s0 + 1, 0.0);
  for (int k = 0; k < draws; ++k) freq[simulate_outbreak(c, h, rng).total] += 1.0;
  for (auto& f : freq) f /= draws;
  return freq;
}

// Every cell within `z` binomial standard errors of the exact mass.
void check_within_se(const std::vector<double>& freq, const std::vector<double>& exact, int draws,
                     double z) {
  REQUIRE(freq.size() == exact.size());
  for (std::size_t x = 0; x < exact.size(); ++x) {
    CAPTURE(x);
    const double se = std::sqrt(exact[x] * (1.0 - exact[x]) / draws);
    CHECK(std::abs(freq[x] - exact[x]) <= z * se + 1e-12);
  }
}

}  // namespace

TEST_CASE("outbreak edge cases") {
  Rng rng = substream(1, 0);
  for (int s0 = 0; s0 <= 5; ++s0) {
    const auto none = simulate_outbreak(HouseholdConfig{s0, 1, 0.0}, Horizon::final_size(), rng);
    CHECK(none.total == 0);
    CHECK(none.chain == Scenario{{0}});
    const auto all = simulate_outbreak(HouseholdConfig{s0, 2, 1.0}, Horizon::final_size(), rng);
    CHECK(all.total == s0);
    CHECK(all.chain == Scenario{{s0}});
  }
  for (int k = 0; k < 1000; ++k) {
    const auto draw = simulate_outbreak(HouseholdConfig{6, 1, 0.5}, Horizon::after(3), rng);
    CHECK(draw.chain.well_formed());
    CHECK(draw.chain.length() <= 3);
    CHECK(draw.chain.total() == draw.total);
  }
}

TEST_CASE("binomial sampler") {
  Rng rng = substream(2, 0);
  CHECK(sample_binomial(rng, 0, 0.4) == 0);
  CHECK(sample_binomial(rng, 7, 0.0) == 0);
  CHECK(sample_binomial(rng, 7, 1.0) == 7);
  CHECK_THROWS_AS(sample_binomial(rng, -1, 0.4), DomainError);
  CHECK_THROWS_AS(sample_binomial(rng, 3, 1.4), DomainError);
  const int draws = 200000;
  for (double p : {0.1, 0.5, 0.85}) {
    const int n = 8;
    std::vector<double> freq(n + 1, 0.0), exact(n + 1);
    for (int k = 0; k < draws; ++k) freq[sample_binomial(rng, n, p)] += 1.0 / draws;
    for (int x = 0; x <= n; ++x) exact[x] = oracle::binomial_pmf(x, n, p);
    check_within_se(freq, exact, draws, 4.0);
  }
  double sum = 0.0;
  for (int k = 0; k < 2000; ++k) sum += sample_binomial(rng, 5000, 0.3);
  const double mean = sum / 2000;
  CHECK(std::abs(mean - 1500.0) <= 4.0 * std::sqrt(5000 * 0.3 * 0.7 / 2000));
}

TEST_CASE("uniform draws lie in [0, 1)") {
  Rng rng = substream(3, 4);
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform01(rng);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 1e-3);
  CHECK(hi > 1 - 1e-3);
}

TEST_CASE("two generations at s0 = 4") {
  const HouseholdConfig c{4, 1, 0.3};
  Rng rng = substream(4, 0);
  const int draws = 100000;
  check_within_se(empirical_totals(c, Horizon::after(2), draws, rng), incomplete_pmf_vector(c, 2),
                  draws, 4.0);
}

TEST_CASE("forward simulation matches the exact distributions") {
  const int draws = 100000;
  std::uint64_t stream = 0;
  for (int s0 = 1; s0 <= 6; ++s0) {
    for (double a : {0.2, 0.5, 0.8}) {
      for (int d : {1, 2, s0}) {
        CAPTURE(s0);
        CAPTURE(a);
        CAPTURE(d);
        const HouseholdConfig c{s0, 1, a};
        Rng rng = substream(5, stream++);
        check_within_se(empirical_totals(c, Horizon::after(d), draws, rng),
                        incomplete_pmf_vector(c, d), draws, 4.0);
      }
    }
  }
}

TEST_CASE("generation by generation progression") {
  const HouseholdConfig c{5, 1, 0.2};
  const int draws = 1000000;
  for (int d = 1; d <= 5; ++d) {
    Rng rng = substream(6, static_cast<std::uint64_t>(d));
    check_within_se(empirical_totals(c, Horizon::after(d), draws, rng), incomplete_pmf_vector(c, d),
                    draws, 4.0);
  }
}

TEST_CASE("study simulation") {
  SimConfig sim;
  sim.n_households = 50;
  sim.household_size_dist = {{3, 1.0}};
  Rng rng = substream(7, 0);
  const auto fixed = simulate_study(sim, rng);
  REQUIRE(fixed.size() == 50);
  for (const auto& obs : fixed) {
    CHECK(obs.s0 == 2);
    CHECK(obs.i0 == 1);
    CHECK(obs.horizon.is_final());
  }
  CHECK(fixed.front().id == "h1");
  CHECK(fixed.back().id == "h50");

  sim.household_size_dist = default_household_sizes();
  sim.n_households = 10000;
  Rng rng2 = substream(7, 1);
  const auto big = simulate_study(sim, rng2);
  double mean = 0.0, second = 0.0;
  for (const auto& [size, w] : sim.household_size_dist) {
    mean += size * w;
    second += size * size * w;
  }
  double sample = 0.0;
  for (const auto& obs : big) sample += obs.s0 + obs.i0;
  sample /= big.size();
  const double se = std::sqrt((second - mean * mean) / big.size());
  CHECK(std::abs(sample - mean) <= 3.0 * se);
}

TEST_CASE("index case distribution") {
  SimConfig sim;
  sim.n_households = 2000;
  sim.household_size_dist = {{4, 1.0}};
  sim.i0_dist = {{1, 0.5}, {2, 0.5}};
  Rng rng = substream(8, 0);
  int twos = 0;
  for (const auto& obs : simulate_study(sim, rng)) {
    CHECK(obs.s0 + obs.i0 == 4);
    twos += obs.i0 == 2;
  }
  CHECK(std::abs(twos - 1000) <= 4.0 * std::sqrt(2000 * 0.25));
}

TEST_CASE("determinism and substreams") {
  SimConfig sim;
  sim.n_households = 40;
  sim.sar = 0.35;
  sim.horizon = Horizon::after(2);
  Rng a = substream(123, 9);
  Rng b = substream(123, 9);
  CHECK(simulate_study(sim, a) == simulate_study(sim, b));

  Rng c = substream(123, 10);
  Rng d = substream(124, 9);
  Rng e = substream(123, 9);
  const auto base = simulate_study(sim, e);
  CHECK(simulate_study(sim, c) != base);
  CHECK(simulate_study(sim, d) != base);

  // Drawing other streams first does not disturb stream 9.
  for (std::uint64_t s = 0; s < 9; ++s) {
    Rng other = substream(123, s);
    simulate_study(sim, other);
  }
  Rng again = substream(123, 9);
  CHECK(simulate_study(sim, again) == base);

  Rng known = substream(20240101, 0);
  CHECK(known() == substream(20240101, 0)());
}

TEST_CASE("coverage experiment") {
  SimConfig sim;
  sim.n_households = 30;
  sim.sar = 0.4;
  sim.replications = 40;
  const std::vector<double> levels{0.8, 0.95};
  const auto rows = coverage_experiment(sim, levels);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == CiMethod::wilks);
  CHECK(rows[1].method == CiMethod::wilks);
  CHECK(rows[2].method == CiMethod::normal);
  CHECK(rows[0].nominal_level == 0.8);
  CHECK(rows[1].nominal_level == 0.95);
  for (const auto& row : rows) {
    CHECK(row.n_estimable <= row.replications);
    REQUIRE(row.realized_coverage);
    CHECK(*row.realized_coverage >= 0.0);
    CHECK(*row.realized_coverage <= 1.0);
    CHECK(row.n_households == 30);
  }
  CHECK(rows[0].n_covered <= rows[1].n_covered);

  const auto again = coverage_experiment(sim, levels);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].n_covered == again[k].n_covered);
    CHECK(rows[k].n_estimable == again[k].n_estimable);
  }

  // Replication r uses the same data whatever the replication count.
  SimConfig one = sim;
  one.replications = 1;
  Rng r0 = substream(sim.seed, 0);
  const auto first = simulate_study(sim, r0);
  const auto single = coverage_experiment(one, {0.95});
  const auto w = wilks_ci(first, 0.95);
  CHECK(single[0].n_covered == int(w.lower <= sim.sar && sim.sar <= w.upper));
}

TEST_CASE("boundary estimates make normal intervals fail") {
  SimConfig sim;
  sim.n_households = 20;
  sim.sar = 0.8;
  sim.replications = 200;
  sim.household_size_dist = {{2, 0.4}, {3, 0.3}, {4, 0.3}};
  const auto rows = coverage_experiment(sim, {0.95});
  CHECK(rows[0].n_estimable == 200);
  CHECK(rows[1].n_estimable < 200);
}

TEST_CASE("configuration validation") {
  SimConfig sim;
  sim.n_households = 0;
  CHECK_THROWS_AS(sim.validate(), DomainError);
  sim = SimConfig{};
  sim.household_size_dist = {{2, 0.0}};
  CHECK_THROWS_AS(sim.validate(), DomainError);
  sim = SimConfig{};
  sim.household_size_dist = {{2, -1.0}, {3, 2.0}};
  CHECK_THROWS_AS(sim.validate(), DomainError);
  sim = SimConfig{};
  sim.i0_dist = {{3, 1.0}};
  CHECK_THROWS_AS(sim.validate(), DomainError);
  sim = SimConfig{};
  sim.replications = 0;
  CHECK_THROWS_AS(sim.validate(), DomainError);
  CHECK_THROWS_AS(coverage_experiment(SimConfig{}, {}), DomainError);
  CHECK_THROWS_AS(coverage_experiment(SimConfig{}, {1.0}), DomainError);
}
