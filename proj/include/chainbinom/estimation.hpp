#pragma once

// Maximum-likelihood inference on a single secondary attack rate shared by
// independently observed households.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chainbinom/model_core.hpp"

namespace chainbinom {

/// A covariate is numeric or a categorical level.
using CovariateValue = std::variant<double, std::string>;
using CovariateMap = std::map<std::string, CovariateValue>;

std::string covariate_to_string(const CovariateValue& value);

struct HouseholdObservation {
  std::string id;
  int s0 = 0;
  int i0 = 1;
  int infected = 0;
  Horizon horizon = Horizon::final_size();
  CovariateMap covariates;

  /// Throws DataError naming the household on an invariant violation.
  void validate() const;

  friend bool operator==(const HouseholdObservation&, const HouseholdObservation&) = default;
};

enum class CiMethod { wilks, normal };

std::string to_string(CiMethod method);
/// Throws DomainError for names other than "wilks" / "normal".
CiMethod parse_ci_method(const std::string& name);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct SarEstimate {
  double sar_hat = 0.0;
  std::optional<double> std_error;  ///< empty when unavailable
  double ci_lower = 0.0;            ///< NaN when the interval does not exist
  double ci_upper = 0.0;
  CiMethod ci_method = CiMethod::wilks;
  double ci_level = 0.95;
  double loglik = 0.0;
  bool on_boundary = false;
};

/// Per-household outbreak-size log probabilities with the scenario sets
/// compiled once. Households sharing (s0, i0, infected, horizon) share a cell.
class HouseholdLikelihood {
 public:
  explicit HouseholdLikelihood(std::span<const HouseholdObservation> data);

  std::size_t households() const { return cell_of_household_.size(); }

  /// Sum of log probabilities at a common attack rate.
  double log_likelihood(double sar) const;
  /// log p_i for household i at its own attack rate; -inf outside [0, 1].
  double household_log_pmf(std::size_t household, double sar) const;

 private:
  struct Step {
    int susceptible;
    int infectious;
    int next;
    double log_choose;
  };
  struct Cell {
    int multiplicity = 0;
    std::vector<std::vector<Step>> chains;
  };
  double cell_log_pmf(const Cell& cell, double sar) const;

  std::vector<Cell> cells_;
  std::vector<std::size_t> cell_of_household_;
};

/// Sum over households of the log outbreak-size probability at `sar`;
/// -inf when any household is impossible under `sar`.
double log_likelihood(std::span<const HouseholdObservation> data, double sar);

struct FitOptions {
  CiMethod ci_method = CiMethod::wilks;
  double ci_level = 0.95;
};

/// Bounded scalar maximization of the likelihood. Estimates within 1e-6 of 0
/// or 1 are reported as exactly 0 or 1 with no standard error. When the
/// requested interval cannot be formed its endpoints are NaN.
/// Throws DataError for empty data.
SarEstimate fit_sar(std::span<const HouseholdObservation> data, const FitOptions& options = {});
SarEstimate fit_sar(const HouseholdLikelihood& likelihood, const FitOptions& options = {});

/// Likelihood-ratio interval {a : 2 (l(a_hat) - l(a)) <= chisq1_quantile(level)}.
Interval wilks_ci(std::span<const HouseholdObservation> data, double level);
/// Same, reusing a fit and compiled likelihood.
Interval wilks_ci(const HouseholdLikelihood& likelihood, const SarEstimate& estimate,
                  double level);

/// sar_hat -/+ z * se truncated to [0, 1]. Throws UnavailableError when the
/// estimate has no standard error.
Interval normal_ci(const SarEstimate& estimate, double level);

}  // namespace chainbinom
