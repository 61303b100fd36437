#pragma once

// Exact probability computations for the Reed-Frost chain binomial model of
// within-household transmission.
//
// A household starts with i0 index cases and s0 susceptibles. In every
// generation each remaining susceptible is infected with probability
// 1 - (1 - sar)^I, where I is the number infected in the previous generation.
// Infecteds are infectious for exactly one generation.

#include <cstdint>
#include <string>
#include <vector>

namespace chainbinom {

/// Largest outbreak total for which scenarios are enumerated explicitly.
inline constexpr int kMaxEnumerationTotal = 25;

struct HouseholdConfig {
  int s0 = 0;  ///< initial susceptibles
  int i0 = 1;  ///< index cases (0 is accepted and gives a point mass at 0)
  double sar = 0.0;

  int household_size() const { return s0 + i0; }
  /// Throws DomainError when a field is out of range.
  void validate() const;
};

struct OutbreakState {
  int generation = 0;
  int infectious = 0;
  int susceptible = 0;
  double infection_prob = 0.0;
};

/// New-infection counts for generations 1..d. Positive entries come first;
/// once a generation has no new cases every later entry is zero.
struct Scenario {
  std::vector<int> counts;

  int length() const { return static_cast<int>(counts.size()); }
  int total() const;
  /// True when no positive entry follows a zero.
  bool well_formed() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
  friend auto operator<=>(const Scenario&, const Scenario&) = default;
};

/// Observation horizon: a fixed number of generations, or the concluded
/// outbreak.
class Horizon {
 public:
  static constexpr Horizon final_size() { return Horizon(0); }
  /// Throws DomainError unless generations >= 1.
  static Horizon after(int generations);

  constexpr bool is_final() const { return generations_ == 0; }
  /// Number of generations; throws DomainError for the final-size horizon.
  int generations() const;
  /// Generations needed to evaluate the distribution for a household with s0
  /// susceptibles. Horizons longer than s0 are clamped since the distribution
  /// has stabilized by then.
  int effective_generations(int s0) const;
  /// "final" or the decimal generation count.
  std::string to_string() const;
  /// Inverse of to_string(); the empty string also means final.
  static Horizon parse(const std::string& text);

  friend constexpr bool operator==(Horizon, Horizon) = default;

 private:
  constexpr explicit Horizon(int generations) : generations_(generations) {}
  int generations_;
};

/// Per-susceptible infection probability 1 - (1 - alpha)^infectious.
double escape_probability(double alpha, int infectious);

/// Binomial(state.susceptible, pi) mass at i_next with
/// pi = escape_probability(alpha, state.infectious).
double transition_pmf(int i_next, const OutbreakState& state, double alpha);

/// Probability of the infection chain i_1 -> ... -> i_d. A zero entry after
/// positive ones contributes the probability that every remaining susceptible
/// escapes.
double chain_probability(const Scenario& scenario, const HouseholdConfig& config);

/// Number of length-`generations` scenarios whose counts sum to `total`.
/// Throws GuardError if the count does not fit in 64 bits.
std::uint64_t count_scenarios(int total, int generations);

/// All length-`generations` scenarios summing to `total`, in ascending
/// lexicographic order. For total >= generations the first scenario is
/// (1, 1, ..., total - generations + 1).
/// Throws GuardError when total exceeds kMaxEnumerationTotal.
std::vector<Scenario> enumerate_scenarios(int total, int generations);

/// Probability that `total` of the s0 susceptibles have been infected by the
/// end of generation `generations`.
double incomplete_pmf(int total, const HouseholdConfig& config, int generations);

/// Probability that the concluded outbreak infects `total` susceptibles.
double final_size_pmf(int total, const HouseholdConfig& config);

/// Probability of `total` under the given horizon.
double outbreak_pmf(int total, const HouseholdConfig& config, Horizon horizon);

/// PMF over totals 0..s0.
std::vector<double> incomplete_pmf_vector(const HouseholdConfig& config, int generations);
std::vector<double> final_size_pmf_vector(const HouseholdConfig& config);
std::vector<double> outbreak_pmf_vector(const HouseholdConfig& config, Horizon horizon);

/// Expected proportion of the s0 susceptibles infected under the horizon.
/// Throws DomainError when s0 == 0.
double expected_far(const HouseholdConfig& config, Horizon horizon);

/// The sar-independent scenario sets for one (s0, horizon) pair. Build once
/// and evaluate the PMF for many attack rates and index-case counts.
/// Immutable after construction.
class ScenarioTable {
 public:
  ScenarioTable(int s0, Horizon horizon);

  int s0() const { return s0_; }
  int generations() const { return generations_; }
  const std::vector<Scenario>& scenarios(int total) const;

  double pmf(int total, int i0, double sar) const;
  std::vector<double> pmf_vector(int i0, double sar) const;

 private:
  int s0_;
  int generations_;
  std::vector<std::vector<Scenario>> by_total_;
};

}  // namespace chainbinom
