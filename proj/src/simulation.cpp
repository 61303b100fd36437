#include "chainbinom/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chainbinom/errors.hpp"

namespace chainbinom {

Rng substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_binomial(Rng& rng, int n, double p) {
  if (n < 0) throw DomainError("binomial size must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);
  if (n > 1000) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += uniform01(rng) < p ? 1 : 0;
    return k;
  }
  const double q = 1.0 - p;
  const double ratio = p / q;
  double mass = std::pow(q, n);
  double cdf = mass;
  const double u = uniform01(rng);
  int k = 0;
  while (u >= cdf && k < n) {
    mass *= ratio * (n - k) / (k + 1);
    ++k;
    cdf += mass;
  }
  return k;
}

std::size_t sample_index(Rng& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("weights must have a positive sum");
  const double u = uniform01(rng) * total;
  double cdf = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cdf += weights[i];
    last_positive = i;
    if (u < cdf) return i;
  }
  return last_positive;
}

OutbreakDraw simulate_outbreak(const HouseholdConfig& config, Horizon horizon, Rng& rng) {
  config.validate();
  const int max_generations = horizon.is_final() ? std::max(1, config.s0)
                                                 : horizon.generations();
  OutbreakDraw draw;
  int susceptible = config.s0;
  int infectious = config.i0;
  for (int g = 0; g < max_generations; ++g) {
    const double pi = 1.0 - std::pow(1.0 - config.sar, infectious);
    const int next = sample_binomial(rng, susceptible, pi);
    draw.chain.counts.push_back(next);
    draw.total += next;
    susceptible -= next;
    infectious = next;
    if (next == 0 || susceptible == 0) break;
  }
  return draw;
}

std::vector<std::pair<int, double>> default_household_sizes() {
  return {{2, 0.28}, {3, 0.23}, {4, 0.25}, {5, 0.16}, {6, 0.08}};
}

namespace {

void check_weights(const std::vector<std::pair<int, double>>& dist, const char* what) {
  if (dist.empty()) throw DomainError(std::string(what) + " distribution is empty");
  bool positive = false;
  for (const auto& [value, weight] : dist) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw DomainError(std::string(what) + " weights must be nonnegative");
    }
    positive = positive || weight > 0.0;
  }
  if (!positive) throw DomainError(std::string(what) + " weights need a positive entry");
}

std::vector<double> weights_of(const std::vector<std::pair<int, double>>& dist) {
  std::vector<double> w;
  w.reserve(dist.size());
  for (const auto& entry : dist) w.push_back(entry.second);
  return w;
}

}  // namespace

void SimConfig::validate() const {
  if (n_households < 1) throw DomainError("n_households must be at least 1");
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (!(sar >= 0.0 && sar <= 1.0)) throw DomainError("sar must lie in [0, 1]");
  check_weights(household_size_dist, "household size");
  check_weights(i0_dist, "index case");
  for (const auto& [i0, wi] : i0_dist) {
    if (wi > 0.0 && i0 < 1) throw DomainError("index case counts must be at least 1");
    for (const auto& [size, ws] : household_size_dist) {
      if (wi > 0.0 && ws > 0.0 && size < i0) {
        throw DomainError("household size " + std::to_string(size) + " smaller than i0 " +
                          std::to_string(i0));
      }
    }
  }
}

std::vector<HouseholdObservation> simulate_study(const SimConfig& sim, Rng& rng) {
  sim.validate();
  const auto size_weights = weights_of(sim.household_size_dist);
  const auto i0_weights = weights_of(sim.i0_dist);
  std::vector<HouseholdObservation> out;
  out.reserve(sim.n_households);
  for (int h = 0; h < sim.n_households; ++h) {
    const int size = sim.household_size_dist[sample_index(rng, size_weights)].first;
    const int i0 = sim.i0_dist[sample_index(rng, i0_weights)].first;
    const HouseholdConfig config{size - i0, i0, sim.sar};
    const auto draw = simulate_outbreak(config, sim.horizon, rng);
    HouseholdObservation obs;
    obs.id = "h" + std::to_string(h + 1);
    obs.s0 = config.s0;
    obs.i0 = i0;
    obs.infected = draw.total;
    obs.horizon = sim.horizon;
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<CoverageRow> coverage_experiment(const SimConfig& sim,
                                             const std::vector<double>& levels) {
  sim.validate();
  if (levels.empty()) throw DomainError("coverage_experiment needs at least one level");
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("levels must lie in (0, 1)");
  }

  const std::size_t n_levels = levels.size();
  std::vector<int> wilks_covered(n_levels, 0), normal_covered(n_levels, 0);
  int wilks_estimable = 0;
  int normal_estimable = 0;

  for (int r = 0; r < sim.replications; ++r) {
    Rng rng = substream(sim.seed, static_cast<std::uint64_t>(r));
    const auto data = simulate_study(sim, rng);
    const HouseholdLikelihood lik(data);
    SarEstimate est;
    try {
      est = fit_sar(lik, FitOptions{CiMethod::normal, levels.front()});
    } catch (const EvaluationError&) {
      continue;
    }
    ++wilks_estimable;
    if (est.std_error) ++normal_estimable;
    for (std::size_t k = 0; k < n_levels; ++k) {
      const Interval w = wilks_ci(lik, est, levels[k]);
      if (w.lower <= sim.sar && sim.sar <= w.upper) ++wilks_covered[k];
      if (est.std_error) {
        const Interval n = normal_ci(est, levels[k]);
        if (n.lower <= sim.sar && sim.sar <= n.upper) ++normal_covered[k];
      }
    }
  }

  std::vector<CoverageRow> rows;
  for (CiMethod method : {CiMethod::wilks, CiMethod::normal}) {
    for (std::size_t k = 0; k < n_levels; ++k) {
      CoverageRow row;
      row.method = method;
      row.nominal_level = levels[k];
      row.n_households = sim.n_households;
      row.sar = sim.sar;
      row.horizon = sim.horizon;
      row.replications = sim.replications;
      row.n_estimable = method == CiMethod::wilks ? wilks_estimable : normal_estimable;
      row.n_covered = method == CiMethod::wilks ? wilks_covered[k] : normal_covered[k];
      if (row.n_estimable > 0) {
        row.realized_coverage = static_cast<double>(row.n_covered) / row.n_estimable;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace chainbinom
