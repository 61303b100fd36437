#include "chainbinom/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "chainbinom/errors.hpp"
#include "chainbinom/numerics.hpp"

namespace chainbinom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string household_label(const HouseholdObservation& obs, std::size_t row) {
  return obs.id.empty() ? "row " + std::to_string(row + 1) : obs.id;
}

}  // namespace

LinkFunction LinkFunction::from_name(const std::string& name) {
  if (name == "logit") return LinkFunction(Link::logit);
  if (name == "log") return LinkFunction(Link::log);
  if (name == "identity") return LinkFunction(Link::identity);
  throw DomainError("unknown link '" + name + "' (expected logit, log or identity)");
}

std::string LinkFunction::name() const {
  switch (kind_) {
    case Link::logit: return "logit";
    case Link::log: return "log";
    case Link::identity: return "identity";
  }
  return "?";
}

double LinkFunction::apply(double p) const {
  switch (kind_) {
    case Link::logit: return std::log(p) - std::log1p(-p);
    case Link::log: return std::log(p);
    case Link::identity: return p;
  }
  return p;
}

double LinkFunction::inverse(double eta) const {
  switch (kind_) {
    case Link::logit: return 1.0 / (1.0 + std::exp(-eta));
    case Link::log: return std::exp(eta);
    case Link::identity: return eta;
  }
  return eta;
}

Eigen::RowVectorXd DesignMatrix::encode(const CovariateMap& covariates,
                                        const std::string& who) const {
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(column_names_.size()));
  Eigen::Index col = 0;
  row[col++] = 1.0;
  const std::string prefix = who.empty() ? std::string() : "household '" + who + "': ";
  for (const auto& term : terms_) {
    const auto it = covariates.find(term.name);
    if (it == covariates.end()) {
      throw DataError(prefix + "missing covariate '" + term.name + "'");
    }
    if (!term.categorical) {
      const auto* value = std::get_if<double>(&it->second);
      if (value == nullptr || !std::isfinite(*value)) {
        throw DataError(prefix + "covariate '" + term.name + "' is not a finite number");
      }
      row[col++] = *value;
      continue;
    }
    const std::string level = covariate_to_string(it->second);
    if (std::find(term.levels.begin(), term.levels.end(), level) == term.levels.end()) {
      throw DataError(prefix + "unknown level '" + level + "' for covariate '" + term.name + "'");
    }
    for (const auto& candidate : term.levels) {
      if (candidate == term.reference) continue;
      row[col++] = candidate == level ? 1.0 : 0.0;
    }
  }
  return row;
}

DesignMatrix design_matrix(std::span<const HouseholdObservation> data,
                           const std::vector<std::string>& predictors,
                           const DesignOptions& options) {
  std::vector<TermEncoding> terms;
  std::vector<std::string> names{"intercept"};
  for (const auto& predictor : predictors) {
    TermEncoding term;
    term.name = predictor;
    bool any_text = false;
    bool any_number = false;
    std::set<std::string> levels;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto it = data[i].covariates.find(predictor);
      if (it == data[i].covariates.end()) {
        throw DataError("household '" + household_label(data[i], i) + "': missing covariate '" +
                        predictor + "'");
      }
      if (std::holds_alternative<std::string>(it->second)) {
        any_text = true;
      } else {
        any_number = true;
        if (!std::isfinite(std::get<double>(it->second))) {
          throw DataError("household '" + household_label(data[i], i) + "': covariate '" +
                          predictor + "' is not finite");
        }
      }
      levels.insert(covariate_to_string(it->second));
    }
    if (any_text && any_number) {
      throw DataError("covariate '" + predictor + "' mixes numeric and categorical values");
    }
    term.categorical = any_text;
    if (term.categorical) {
      term.levels.assign(levels.begin(), levels.end());
      term.reference = term.levels.front();
      if (auto ref = options.reference_levels.find(predictor);
          ref != options.reference_levels.end()) {
        if (!levels.contains(ref->second)) {
          throw DataError("reference level '" + ref->second + "' not observed for covariate '" +
                          predictor + "'");
        }
        term.reference = ref->second;
      }
      for (const auto& level : term.levels) {
        if (level != term.reference) names.push_back(predictor + "=" + level);
      }
    } else {
      names.push_back(predictor);
    }
    terms.push_back(std::move(term));
  }

  DesignMatrix shape(Eigen::MatrixXd(), names, terms);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        shape.encode(data[i].covariates, household_label(data[i], i));
  }
  return DesignMatrix(std::move(x), std::move(names), std::move(terms));
}

namespace {

double compiled_glm_loglik(const HouseholdLikelihood& lik, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& beta, const LinkFunction& link) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double sar = link.inverse(eta[i]);
    if (!(sar >= 0.0 && sar <= 1.0)) return -kInf;
    ll += lik.household_log_pmf(static_cast<std::size_t>(i), sar);
    if (ll == -kInf) return ll;
  }
  return ll;
}

void check_dimensions(std::size_t n, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(x.rows()) != n) {
    throw DomainError("design matrix has " + std::to_string(x.rows()) + " rows for " +
                      std::to_string(n) + " households");
  }
  if (x.cols() != beta.size()) {
    throw DomainError("design matrix has " + std::to_string(x.cols()) + " columns but beta has " +
                      std::to_string(beta.size()) + " entries");
  }
}

}  // namespace

double glm_log_likelihood(std::span<const HouseholdObservation> data, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& beta, const LinkFunction& link) {
  check_dimensions(data.size(), x, beta);
  return compiled_glm_loglik(HouseholdLikelihood(data), x, beta, link);
}

std::optional<double> GlmFit::std_error(std::size_t j) const {
  if (!covariance) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(j);
  if (k >= covariance->rows()) throw DomainError("coefficient index out of range");
  return std::sqrt((*covariance)(k, k));
}

Interval GlmFit::coefficient_ci(std::size_t j, double level) const {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  const auto se = std_error(j);
  if (!se) throw UnavailableError("coefficient covariance unavailable");
  const double half = numerics::normal_quantile(0.5 * (1.0 + level)) * *se;
  const double b = coefficients[static_cast<Eigen::Index>(j)];
  return {b - half, b + half};
}

GlmFit fit_glm(std::span<const HouseholdObservation> data,
               const std::vector<std::string>& predictors, const LinkFunction& link,
               const DesignOptions& options) {
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  if (std::set<std::string>(predictors.begin(), predictors.end()).size() != predictors.size()) {
    throw SingularModelError("predictor list contains duplicates");
  }
  const DesignMatrix design = design_matrix(data, predictors, options);
  const Eigen::MatrixXd& x = design.matrix();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw SingularModelError("design matrix is rank deficient (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(x.cols()) + ")");
  }

  const HouseholdLikelihood lik(data);
  const SarEstimate pooled = fit_sar(data, FitOptions{CiMethod::normal, 0.95});
  Eigen::VectorXd start = Eigen::VectorXd::Zero(x.cols());
  start[0] = link.apply(std::clamp(pooled.sar_hat, 0.01, 0.99));

  auto nll = [&](const Eigen::VectorXd& beta) {
    return -compiled_glm_loglik(lik, x, beta, link);
  };
  const auto opt = numerics::minimize_multivariate(nll, start);

  GlmFit fit;
  fit.link = link;
  fit.coefficients = opt.argmin;
  fit.loglik = -opt.value;
  fit.start_loglik = -nll(start);
  fit.converged = opt.converged && std::isfinite(fit.loglik);
  fit.iterations = opt.iterations;
  fit.predictor_names = design.column_names();
  fit.terms = design.terms();

  try {
    const Eigen::MatrixXd hess = numerics::hessian_fd(nll, fit.coefficients);
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (hess.allFinite() && llt.info() == Eigen::Success) {
      Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
      fit.covariance = 0.5 * (cov + cov.transpose());
    }
  } catch (const EvaluationError&) {
    // A finite-difference probe left the feasible region.
  }
  return fit;
}

SarPrediction predict_sar(const GlmFit& fit, const CovariateMap& covariates) {
  const DesignMatrix shape(Eigen::MatrixXd(), fit.predictor_names, fit.terms);
  const double eta = shape.encode(covariates).dot(fit.coefficients);
  const double sar = fit.link.inverse(eta);
  SarPrediction out;
  out.sar = std::clamp(sar, 0.0, 1.0);
  out.clamped = !(sar >= 0.0 && sar <= 1.0);
  return out;
}

}  // namespace chainbinom
