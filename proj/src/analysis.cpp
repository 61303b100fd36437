#include "chainbinom/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chainbinom/errors.hpp"
#include "chainbinom/numerics.hpp"

namespace chainbinom {

namespace {

constexpr double kLower = 1e-6;
constexpr double kUpper = 1.0 - 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

double divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    if (q[x] <= 0.0) return kInf;
    kl += p[x] * std::log(p[x] / q[x]);
  }
  // Rounding can leave a tiny negative sum for identical distributions.
  return std::max(kl, 0.0);
}

// Final-size PMF and its derivative in the attack rate, from the chain
// products: d/da log factor = next * I (1-a)^(I-1) / pi - (s - next) I / (1-a).
class FinalSizeFamily {
 public:
  FinalSizeFamily(int s0, int i0) : table_(s0, Horizon::final_size()), i0_(i0) {}

  std::vector<double> pmf(double sar) const { return table_.pmf_vector(i0_, sar); }

  // d KL / d approx_sar = -sum_x p_x q'_x / q_x
  double kl_gradient(const std::vector<double>& p, double sar) const {
    double g = 0.0;
    for (int x = 0; x <= table_.s0(); ++x) {
      if (p[x] <= 0.0) continue;
      double q = 0.0;
      double dq = 0.0;
      for (const auto& scenario : table_.scenarios(x)) {
        double prob = 1.0;
        double score = 0.0;
        int susceptible = table_.s0();
        int infectious = i0_;
        for (int next : scenario.counts) {
          if (infectious == 0) break;
          const double escape = std::pow(1.0 - sar, infectious);
          const double pi = 1.0 - escape;
          prob *= std::exp(std::lgamma(susceptible + 1.0) - std::lgamma(next + 1.0) -
                           std::lgamma(susceptible - next + 1.0)) *
                  std::pow(pi, next) * std::pow(escape, susceptible - next);
          const double dpi = infectious * std::pow(1.0 - sar, infectious - 1);
          if (next > 0) score += next * dpi / pi;
          score -= static_cast<double>(susceptible - next) * infectious / (1.0 - sar);
          susceptible -= next;
          infectious = next;
        }
        q += prob;
        dq += prob * score;
      }
      g -= p[x] * dq / q;
    }
    return g;
  }

 private:
  ScenarioTable table_;
  int i0_;
};

// Bisection on the sign of the gradient, starting from the scalar search
// result. Returns `start` when no sign change is found inside the domain.
double refine_by_gradient(const FinalSizeFamily& family, const std::vector<double>& p,
                          double start) {
  const double g0 = family.kl_gradient(p, start);
  if (g0 == 0.0 || !std::isfinite(g0)) return start;
  const double direction = g0 > 0.0 ? -1.0 : 1.0;
  double step = 1e-10;
  double other = start;
  for (;;) {
    other = start + direction * step;
    if (other <= kLower || other >= kUpper) return start;
    const double g = family.kl_gradient(p, other);
    if (!std::isfinite(g)) return start;
    if ((g > 0.0) != (g0 > 0.0) || g == 0.0) break;
    step *= 4.0;
  }
  double a = start;  // gradient has the sign of g0
  double b = other;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double g = family.kl_gradient(p, mid);
    if (g == 0.0) return mid;
    if ((g > 0.0) == (g0 > 0.0)) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double kl_divergence(double true_sar, double approx_sar, const HouseholdConfig& config,
                     int generations) {
  const HouseholdConfig truth{config.s0, config.i0, true_sar};
  const HouseholdConfig approx{config.s0, config.i0, approx_sar};
  return divergence(incomplete_pmf_vector(truth, generations), final_size_pmf_vector(approx));
}

BiasPoint best_final_approx(double true_sar, const HouseholdConfig& config, int generations,
                            Sweep sweep) {
  const HouseholdConfig truth{config.s0, config.i0, true_sar};
  truth.validate();
  if (!(true_sar > 0.0)) throw DomainError("relative bias needs a positive true sar");
  const auto p = incomplete_pmf_vector(truth, generations);
  const FinalSizeFamily family(config.s0, config.i0);
  auto kl_at = [&](double b) { return divergence(p, family.pmf(b)); };

  double b = 0.0;
  if (sweep == Sweep::from_lower) {
    b = numerics::minimize_scalar(kl_at, kLower, kUpper, 1e-9).argmin[0];
  } else {
    const auto mirrored = [&](double t) { return kl_at(1.0 - t); };
    b = 1.0 - numerics::minimize_scalar(mirrored, 1.0 - kUpper, 1.0 - kLower, 1e-9).argmin[0];
  }
  const double refined = refine_by_gradient(family, p, b);
  if (kl_at(refined) <= kl_at(b) + 1e-12) b = refined;

  BiasPoint point;
  point.true_sar = true_sar;
  point.approx_sar = b;
  point.generations = generations;
  point.relative_bias = (b - true_sar) / true_sar;
  point.kl_at_min = kl_at(b);
  point.s0 = config.s0;
  point.i0 = config.i0;
  return point;
}

std::vector<BiasPoint> bias_curve(double true_sar, const HouseholdConfig& config,
                                  std::vector<int> d_range) {
  if (d_range.empty()) throw DomainError("bias_curve needs at least one generation count");
  std::sort(d_range.begin(), d_range.end());
  std::vector<BiasPoint> out;
  out.reserve(d_range.size());
  for (int d : d_range) out.push_back(best_final_approx(true_sar, config, d));
  return out;
}

std::vector<BiasPoint> bias_grid(const BiasGrid& grid) {
  std::vector<BiasPoint> out;
  for (int i0 : grid.i0s) {
    for (int s0 : grid.s0s) {
      std::vector<int> ds(std::max(1, s0));
      for (std::size_t k = 0; k < ds.size(); ++k) ds[k] = static_cast<int>(k) + 1;
      for (double sar : grid.sars) {
        auto curve = bias_curve(sar, HouseholdConfig{s0, i0, sar}, ds);
        out.insert(out.end(), curve.begin(), curve.end());
      }
    }
  }
  return out;
}

int stabilization_generation(const HouseholdConfig& config, double tol) {
  config.validate();
  if (!(tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
  const int last = std::max(1, config.s0);
  const auto final_pmf = final_size_pmf_vector(config);
  for (int d = 1; d < last; ++d) {
    const auto pmf = incomplete_pmf_vector(config, d);
    double worst = 0.0;
    for (std::size_t x = 0; x < pmf.size(); ++x) {
      worst = std::max(worst, std::abs(pmf[x] - final_pmf[x]));
    }
    if (worst <= tol) return d;
  }
  return last;
}

}  // namespace chainbinom
