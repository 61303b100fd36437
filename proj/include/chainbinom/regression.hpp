#pragma once

// GLM-style regression of the household attack rate on covariates:
//   link(sar_i) = beta_0 + sum_k beta_k x_ik
// with the chain binomial outbreak-size likelihood in place of an
// exponential-family one.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chainbinom/estimation.hpp"

namespace chainbinom {

enum class Link { logit, log, identity };

class LinkFunction {
 public:
  constexpr explicit LinkFunction(Link kind = Link::logit) : kind_(kind) {}
  /// Throws DomainError for names other than logit / log / identity.
  static LinkFunction from_name(const std::string& name);

  Link kind() const { return kind_; }
  std::string name() const;
  /// Probability -> linear predictor.
  double apply(double p) const;
  /// Linear predictor -> probability. The log and identity links can leave
  /// [0, 1]; callers check the range.
  double inverse(double eta) const;

 private:
  Link kind_;
};

/// How one named predictor is turned into design columns.
struct TermEncoding {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;  ///< sorted; levels[0] is the reference
  std::string reference;
};

struct DesignOptions {
  /// Per-predictor reference level overriding the lexicographic default.
  std::map<std::string, std::string> reference_levels;
};

class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> column_names,
               std::vector<TermEncoding> terms)
      : x_(std::move(x)), column_names_(std::move(column_names)), terms_(std::move(terms)) {}

  const Eigen::MatrixXd& matrix() const { return x_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<TermEncoding>& terms() const { return terms_; }

  /// Encodes one covariate map into a design row. Throws DataError on a
  /// missing covariate or unseen level; `who` names the record in messages.
  Eigen::RowVectorXd encode(const CovariateMap& covariates, const std::string& who = "") const;

 private:
  Eigen::MatrixXd x_;
  std::vector<std::string> column_names_;
  std::vector<TermEncoding> terms_;
};

/// n x (K+1) design with a leading intercept column. Numeric covariates pass
/// through; categorical ones become reference-coded indicators named
/// "<name>=<level>".
DesignMatrix design_matrix(std::span<const HouseholdObservation> data,
                           const std::vector<std::string>& predictors,
                           const DesignOptions& options = {});

/// Sum of per-household log probabilities at sar_i = link.inverse(x_i . beta);
/// -inf when any sar_i leaves [0, 1]. Throws DomainError on dimension
/// mismatch.
double glm_log_likelihood(std::span<const HouseholdObservation> data, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& beta, const LinkFunction& link);

struct GlmFit {
  LinkFunction link;
  Eigen::VectorXd coefficients;
  std::optional<Eigen::MatrixXd> covariance;  ///< empty if the Hessian is not invertible
  double loglik = 0.0;
  double start_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> predictor_names;  ///< column labels, intercept first
  std::vector<TermEncoding> terms;

  std::optional<double> std_error(std::size_t j) const;
  /// beta_j -/+ z * se_j. Throws UnavailableError without a covariance.
  Interval coefficient_ci(std::size_t j, double level) const;
};

/// Maximum likelihood over beta by Nelder-Mead from the start
/// (link(pooled sar clamped to [0.01, 0.99]), 0, ..., 0).
/// Throws SingularModelError for rank-deficient designs or repeated
/// predictors, DataError for empty data.
GlmFit fit_glm(std::span<const HouseholdObservation> data,
               const std::vector<std::string>& predictors, const LinkFunction& link,
               const DesignOptions& options = {});

struct SarPrediction {
  double sar = 0.0;
  bool clamped = false;  ///< the linear predictor mapped outside [0, 1]
};

SarPrediction predict_sar(const GlmFit& fit, const CovariateMap& covariates);

}  // namespace chainbinom
