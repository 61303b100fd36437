#pragma once

// Seeded forward simulation of household outbreaks and the interval-coverage
// experiment built on it.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chainbinom/estimation.hpp"

namespace chainbinom {

/// Engine used for every random draw.
using Rng = std::mt19937_64;

/// Recorded in output metadata.
inline constexpr const char* kRngName = "mt19937_64 seeded by seed_seq(seed, stream)";

/// Independent stream `stream` derived from `seed`. Stream k of a seed never
/// depends on how many other streams are drawn.
Rng substream(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw on [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Binomial(n, p) draw by inversion. Deterministic across platforms, unlike
/// std::binomial_distribution.
int sample_binomial(Rng& rng, int n, double p);

/// Index drawn with probability proportional to `weights`.
std::size_t sample_index(Rng& rng, const std::vector<double>& weights);

struct OutbreakDraw {
  Scenario chain;
  int total = 0;
};

/// Draws i_{g+1} ~ Binomial(s_g, 1 - (1 - sar)^{i_g}) until the horizon, the
/// first generation without new cases (recorded as a 0), or exhaustion of the
/// susceptibles.
OutbreakDraw simulate_outbreak(const HouseholdConfig& config, Horizon horizon, Rng& rng);

/// Household sizes 2..6 with weights 0.28, 0.23, 0.25, 0.16, 0.08.
std::vector<std::pair<int, double>> default_household_sizes();

struct SimConfig {
  int n_households = 100;
  double sar = 0.5;
  Horizon horizon = Horizon::final_size();
  std::vector<std::pair<int, double>> household_size_dist = default_household_sizes();
  /// (i0, weight) pairs; a single entry fixes the index-case count.
  std::vector<std::pair<int, double>> i0_dist{{1, 1.0}};
  std::uint64_t seed = 20240101;
  int replications = 1000;

  /// Throws DomainError on an invalid configuration.
  void validate() const;
};

/// n_households independent households: size from household_size_dist, i0
/// from i0_dist, outbreak simulated to the configured horizon. Ids are
/// "h1".."hN".
std::vector<HouseholdObservation> simulate_study(const SimConfig& sim, Rng& rng);

struct CoverageRow {
  CiMethod method = CiMethod::wilks;
  double nominal_level = 0.95;
  std::optional<double> realized_coverage;  ///< empty when n_estimable == 0
  int n_households = 0;
  double sar = 0.0;
  Horizon horizon = Horizon::final_size();
  int n_estimable = 0;
  int replications = 0;
  int n_covered = 0;
};

/// For each replication r (stream r of sim.seed): simulate a study, fit the
/// attack rate and check whether each interval type at each level contains
/// the true value. Normal intervals are skipped when no standard error
/// exists. Rows are ordered (method, level) with wilks first.
std::vector<CoverageRow> coverage_experiment(const SimConfig& sim,
                                             const std::vector<double>& levels);

}  // namespace chainbinom
