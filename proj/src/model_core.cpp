#include "chainbinom/model_core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "chainbinom/errors.hpp"

namespace chainbinom {

namespace {

void check_probability(double alpha, const char* what) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

// Binomial(n, p) mass at k. The complement q = 1 - p is passed separately so
// that (1 - alpha)^I is never recomputed as 1 - (1 - (1 - alpha)^I).
double binomial_mass(int n, int k, double p, double q) {
  if (k < 0 || k > n) return 0.0;
  return binomial_coefficient(n, k) * std::pow(p, k) * std::pow(q, n - k);
}

void collect(int pos, int remaining, std::vector<int>& current, std::vector<Scenario>& out) {
  const int d = static_cast<int>(current.size());
  if (remaining == 0) {
    out.push_back(Scenario{current});
    return;
  }
  if (pos == d) return;
  if (pos == d - 1) {
    current[pos] = remaining;
    out.push_back(Scenario{current});
    current[pos] = 0;
    return;
  }
  for (int v = 1; v <= remaining; ++v) {
    current[pos] = v;
    collect(pos + 1, remaining - v, current, out);
  }
  current[pos] = 0;
}

void check_total(int total, int s0) {
  if (total < 0 || total > s0) {
    throw DomainError("outbreak total " + std::to_string(total) + " outside [0, " +
                      std::to_string(s0) + "]");
  }
}

}  // namespace

void HouseholdConfig::validate() const {
  if (s0 < 0) throw DomainError("s0 must be nonnegative");
  if (i0 < 0) throw DomainError("i0 must be nonnegative");
  check_probability(sar, "sar");
}

int Scenario::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

bool Scenario::well_formed() const {
  bool dead = false;
  for (int c : counts) {
    if (c < 0) return false;
    if (c == 0) {
      dead = true;
    } else if (dead) {
      return false;
    }
  }
  return true;
}

Horizon Horizon::after(int generations) {
  if (generations < 1) {
    throw DomainError("at least one generation must be observed, got " +
                      std::to_string(generations));
  }
  return Horizon(generations);
}

int Horizon::generations() const {
  if (is_final()) throw DomainError("final-size horizon has no generation count");
  return generations_;
}

int Horizon::effective_generations(int s0) const {
  const int cap = std::max(1, s0);
  return is_final() ? cap : std::min(generations_, cap);
}

std::string Horizon::to_string() const {
  return is_final() ? std::string("final") : std::to_string(generations_);
}

Horizon Horizon::parse(const std::string& text) {
  if (text.empty() || text == "final") return final_size();
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw DomainError("invalid horizon '" + text + "'");
  }
  if (used != text.size()) throw DomainError("invalid horizon '" + text + "'");
  return after(value);
}

double escape_probability(double alpha, int infectious) {
  check_probability(alpha, "sar");
  if (infectious < 0) throw DomainError("infectious count must be nonnegative");
  return 1.0 - std::pow(1.0 - alpha, infectious);
}

double transition_pmf(int i_next, const OutbreakState& state, double alpha) {
  check_probability(alpha, "sar");
  if (state.infectious < 0 || state.susceptible < 0) {
    throw DomainError("outbreak state counts must be nonnegative");
  }
  if (i_next < 0 || i_next > state.susceptible) {
    throw DomainError("new infections " + std::to_string(i_next) + " exceed susceptibles " +
                      std::to_string(state.susceptible));
  }
  const double escape = std::pow(1.0 - alpha, state.infectious);
  return binomial_mass(state.susceptible, i_next, 1.0 - escape, escape);
}

namespace {

// Caller guarantees a well-formed scenario within the susceptible budget.
double chain_probability_unchecked(const std::vector<int>& counts, int s0, int i0, double sar) {
  double p = 1.0;
  int susceptible = s0;
  int infectious = i0;
  for (int next : counts) {
    if (infectious == 0) break;  // every later factor is 1
    const double escape = std::pow(1.0 - sar, infectious);
    p *= binomial_mass(susceptible, next, 1.0 - escape, escape);
    susceptible -= next;
    infectious = next;
  }
  return p;
}

}  // namespace

double chain_probability(const Scenario& scenario, const HouseholdConfig& config) {
  config.validate();
  if (!scenario.well_formed()) {
    throw DomainError("malformed scenario: positive count after a zero generation");
  }
  if (scenario.total() > config.s0) {
    throw DomainError("scenario infects more than the household's susceptibles");
  }
  double p = 1.0;
  int susceptible = config.s0;
  int infectious = config.i0;
  for (int next : scenario.counts) {
    const double escape = std::pow(1.0 - config.sar, infectious);
    p *= binomial_mass(susceptible, next, 1.0 - escape, escape);
    susceptible -= next;
    infectious = next;
  }
  return p;
}

std::uint64_t count_scenarios(int total, int generations) {
  if (total < 0) throw DomainError("total must be nonnegative");
  if (generations < 1) throw DomainError("generations must be at least 1");
  if (total <= 1 || generations == 1) return 1;
  // Row total-1 of Pascal's triangle, summed over the first `generations`
  // entries.
  const int n = total - 1;
  const int parts = std::min(generations, total);
  std::uint64_t sum = 0;
  std::uint64_t c = 1;  // C(n, 0)
  for (int j = 0; j < parts; ++j) {
    if (__builtin_add_overflow(sum, c, &sum)) {
      throw GuardError("scenario count overflows 64 bits");
    }
    // C(n, j+1) = C(n, j) * (n - j) / (j + 1), exact when done in 128 bits.
    const unsigned __int128 next = static_cast<unsigned __int128>(c) * (n - j) / (j + 1);
    if (next > std::numeric_limits<std::uint64_t>::max()) {
      if (j + 1 < parts) throw GuardError("scenario count overflows 64 bits");
      break;
    }
    c = static_cast<std::uint64_t>(next);
  }
  return sum;
}

std::vector<Scenario> enumerate_scenarios(int total, int generations) {
  if (total < 0) throw DomainError("total must be nonnegative");
  if (generations < 1) throw DomainError("generations must be at least 1");
  if (total > kMaxEnumerationTotal) {
    throw GuardError("refusing to enumerate scenarios for total " + std::to_string(total) +
                     " (cap " + std::to_string(kMaxEnumerationTotal) + ")");
  }
  std::vector<Scenario> out;
  out.reserve(count_scenarios(total, generations));
  std::vector<int> current(generations, 0);
  collect(0, total, current, out);
  return out;
}

double incomplete_pmf(int total, const HouseholdConfig& config, int generations) {
  config.validate();
  if (generations < 1) throw DomainError("generations must be at least 1");
  check_total(total, config.s0);
  const int d = Horizon::after(generations).effective_generations(config.s0);
  double p = 0.0;
  for (const auto& scenario : enumerate_scenarios(total, d)) {
    p += chain_probability(scenario, config);
  }
  return p;
}

double final_size_pmf(int total, const HouseholdConfig& config) {
  return incomplete_pmf(total, config, std::max(1, config.s0));
}

double outbreak_pmf(int total, const HouseholdConfig& config, Horizon horizon) {
  return incomplete_pmf(total, config, horizon.effective_generations(config.s0));
}

std::vector<double> incomplete_pmf_vector(const HouseholdConfig& config, int generations) {
  config.validate();
  return ScenarioTable(config.s0, Horizon::after(generations)).pmf_vector(config.i0, config.sar);
}

std::vector<double> final_size_pmf_vector(const HouseholdConfig& config) {
  return outbreak_pmf_vector(config, Horizon::final_size());
}

std::vector<double> outbreak_pmf_vector(const HouseholdConfig& config, Horizon horizon) {
  config.validate();
  return ScenarioTable(config.s0, horizon).pmf_vector(config.i0, config.sar);
}

double expected_far(const HouseholdConfig& config, Horizon horizon) {
  if (config.s0 == 0) throw DomainError("final attack rate undefined for s0 = 0");
  const auto pmf = outbreak_pmf_vector(config, horizon);
  double mean = 0.0;
  for (std::size_t x = 0; x < pmf.size(); ++x) mean += static_cast<double>(x) * pmf[x];
  return mean / config.s0;
}

ScenarioTable::ScenarioTable(int s0, Horizon horizon)
    : s0_(s0), generations_(horizon.effective_generations(s0)) {
  if (s0 < 0) throw DomainError("s0 must be nonnegative");
  by_total_.reserve(s0 + 1);
  for (int x = 0; x <= s0; ++x) by_total_.push_back(enumerate_scenarios(x, generations_));
}

const std::vector<Scenario>& ScenarioTable::scenarios(int total) const {
  check_total(total, s0_);
  return by_total_[total];
}

double ScenarioTable::pmf(int total, int i0, double sar) const {
  HouseholdConfig{s0_, i0, sar}.validate();
  double p = 0.0;
  for (const auto& scenario : scenarios(total)) {
    p += chain_probability_unchecked(scenario.counts, s0_, i0, sar);
  }
  return p;
}

std::vector<double> ScenarioTable::pmf_vector(int i0, double sar) const {
  std::vector<double> out(s0_ + 1);
  for (int x = 0; x <= s0_; ++x) out[x] = pmf(x, i0, sar);
  return out;
}

}  // namespace chainbinom
