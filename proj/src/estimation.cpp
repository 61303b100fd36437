#include "chainbinom/estimation.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <charconv>
#include <tuple>

#include "chainbinom/errors.hpp"
#include "chainbinom/numerics.hpp"

namespace chainbinom {

namespace {

constexpr double kSearchLower = 1e-9;
constexpr double kSearchUpper = 1.0 - 1e-9;
constexpr double kBoundaryProximity = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1), got " + std::to_string(level));
  }
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::string covariate_to_string(const CovariateValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(value));
  return std::string(buf, res.ptr);
}

void HouseholdObservation::validate() const {
  auto fail = [&](const std::string& what) {
    throw DataError("household '" + id + "': " + what);
  };
  if (s0 < 0) fail("s0 must be nonnegative");
  if (i0 < 1) fail("i0 must be at least 1");
  if (infected < 0) fail("infected must be nonnegative");
  if (infected > s0) {
    fail("infected (" + std::to_string(infected) + ") exceeds s0 (" + std::to_string(s0) + ")");
  }
}

std::string to_string(CiMethod method) {
  return method == CiMethod::wilks ? "wilks" : "normal";
}

CiMethod parse_ci_method(const std::string& name) {
  if (name == "wilks") return CiMethod::wilks;
  if (name == "normal") return CiMethod::normal;
  throw DomainError("unknown interval method '" + name + "' (expected wilks or normal)");
}

HouseholdLikelihood::HouseholdLikelihood(std::span<const HouseholdObservation> data) {
  using Key = std::tuple<int, int, int, int>;  // s0, i0, infected, generations
  std::map<Key, std::size_t> index;
  cell_of_household_.reserve(data.size());
  for (const auto& obs : data) {
    obs.validate();
    const int d = obs.horizon.effective_generations(obs.s0);
    const Key key{obs.s0, obs.i0, obs.infected, d};
    auto [it, inserted] = index.emplace(key, cells_.size());
    if (inserted) {
      Cell cell;
      for (const auto& scenario : enumerate_scenarios(obs.infected, d)) {
        std::vector<Step> chain;
        int susceptible = obs.s0;
        int infectious = obs.i0;
        for (int next : scenario.counts) {
          chain.push_back({susceptible, infectious, next, log_choose(susceptible, next)});
          susceptible -= next;
          infectious = next;
          // Nothing further can happen once no one is infectious.
          if (next == 0) break;
        }
        cell.chains.push_back(std::move(chain));
      }
      cells_.push_back(std::move(cell));
    }
    ++cells_[it->second].multiplicity;
    cell_of_household_.push_back(it->second);
  }
}

double HouseholdLikelihood::cell_log_pmf(const Cell& cell, double sar) const {
  if (!(sar >= 0.0 && sar <= 1.0)) return -kInf;
  const double log_keep = std::log1p(-sar);  // log(1 - sar), -inf at sar = 1
  double total = 0.0;
  for (const auto& chain : cell.chains) {
    double log_p = 0.0;
    for (const Step& step : chain) {
      const int escaped = step.susceptible - step.next;
      if (step.infectious == 0) {
        if (step.next > 0) log_p = -kInf;
        continue;
      }
      const double log_escape = step.infectious * log_keep;
      log_p += step.log_choose;
      if (step.next > 0) log_p += step.next * std::log(-std::expm1(log_escape));
      if (escaped > 0) log_p += escaped * log_escape;
    }
    total += std::exp(log_p);
  }
  return std::log(total);
}

double HouseholdLikelihood::log_likelihood(double sar) const {
  double ll = 0.0;
  for (const auto& cell : cells_) {
    ll += cell.multiplicity * cell_log_pmf(cell, sar);
  }
  return ll;
}

double HouseholdLikelihood::household_log_pmf(std::size_t household, double sar) const {
  return cell_log_pmf(cells_.at(cell_of_household_.at(household)), sar);
}

double log_likelihood(std::span<const HouseholdObservation> data, double sar) {
  if (!(sar >= 0.0 && sar <= 1.0)) {
    throw DomainError("sar must lie in [0, 1], got " + std::to_string(sar));
  }
  return HouseholdLikelihood(data).log_likelihood(sar);
}

namespace {

SarEstimate fit_compiled(const HouseholdLikelihood& lik, const FitOptions& options) {
  check_level(options.ci_level);
  auto nll = [&](double a) { return -lik.log_likelihood(a); };
  const auto opt = numerics::minimize_scalar(nll, kSearchLower, kSearchUpper, 1e-10);

  SarEstimate est;
  est.ci_method = options.ci_method;
  est.ci_level = options.ci_level;
  est.sar_hat = opt.argmin[0];
  est.loglik = -opt.value;

  for (double edge : {0.0, 1.0}) {
    if (std::abs(est.sar_hat - edge) < kBoundaryProximity) {
      const double ll_edge = lik.log_likelihood(edge);
      if (std::isfinite(ll_edge) && ll_edge >= est.loglik - 1e-9) {
        est.sar_hat = edge;
        est.loglik = ll_edge;
        est.on_boundary = true;
      }
    }
  }

  if (!est.on_boundary) {
    try {
      const auto hess = numerics::hessian_fd(
          [&](const Eigen::VectorXd& a) { return nll(a[0]); },
          Eigen::VectorXd::Constant(1, est.sar_hat));
      const double curvature = hess(0, 0);
      if (std::isfinite(curvature) && curvature > 0.0) est.std_error = 1.0 / std::sqrt(curvature);
    } catch (const EvaluationError&) {
      // Finite-difference probes left the support: no standard error.
    }
  }

  if (options.ci_method == CiMethod::wilks) {
    const Interval ci = wilks_ci(lik, est, options.ci_level);
    est.ci_lower = ci.lower;
    est.ci_upper = ci.upper;
  } else if (est.std_error) {
    const Interval ci = normal_ci(est, options.ci_level);
    est.ci_lower = ci.lower;
    est.ci_upper = ci.upper;
  } else {
    est.ci_lower = est.ci_upper = std::numeric_limits<double>::quiet_NaN();
  }
  return est;
}

// Bisects between a point `inside` the confidence set and one `outside` it.
double bisect_endpoint(const std::function<double(double)>& stat, double critical, double inside,
                       double outside) {
  for (int i = 0; i < 200 && std::abs(outside - inside) > 1e-13; ++i) {
    const double mid = 0.5 * (inside + outside);
    if (stat(mid) <= critical) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return 0.5 * (inside + outside);
}

}  // namespace

SarEstimate fit_sar(std::span<const HouseholdObservation> data, const FitOptions& options) {
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  const HouseholdLikelihood lik(data);
  return fit_compiled(lik, options);
}

SarEstimate fit_sar(const HouseholdLikelihood& likelihood, const FitOptions& options) {
  if (likelihood.households() == 0) throw DataError("cannot fit an empty dataset");
  return fit_compiled(likelihood, options);
}

Interval wilks_ci(const HouseholdLikelihood& likelihood, const SarEstimate& estimate,
                  double level) {
  check_level(level);
  const double critical = numerics::chisq1_quantile(level);
  auto stat = [&](double a) {
    const double ll = likelihood.log_likelihood(a);
    return std::isfinite(ll) ? 2.0 * (estimate.loglik - ll) : kInf;
  };

  Interval ci;
  const double a_hat = estimate.sar_hat;
  if (a_hat <= 0.0 || stat(0.0) <= critical) {
    ci.lower = 0.0;
  } else {
    ci.lower = bisect_endpoint(stat, critical, a_hat, 0.0);
  }
  if (a_hat >= 1.0 || stat(1.0) <= critical) {
    ci.upper = 1.0;
  } else {
    ci.upper = bisect_endpoint(stat, critical, a_hat, 1.0);
  }
  return ci;
}

Interval wilks_ci(std::span<const HouseholdObservation> data, double level) {
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  const HouseholdLikelihood lik(data);
  const SarEstimate est = fit_compiled(lik, FitOptions{CiMethod::normal, level});
  return wilks_ci(lik, est, level);
}

Interval normal_ci(const SarEstimate& estimate, double level) {
  check_level(level);
  if (!estimate.std_error) {
    throw UnavailableError("normal interval unavailable: no standard error at sar_hat = " +
                           std::to_string(estimate.sar_hat));
  }
  const double half = numerics::normal_quantile(0.5 * (1.0 + level)) * *estimate.std_error;
  return {std::max(0.0, estimate.sar_hat - half), std::min(1.0, estimate.sar_hat + half)};
}

}  // namespace chainbinom
