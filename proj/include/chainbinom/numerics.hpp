#pragma once

// Small, dependency-free numerical toolbox used by the estimators: bounded
// Brent minimization, Nelder-Mead, central-difference Hessians and the
// normal / chi-square(1) quantiles.

#include <functional>

#include <Eigen/Dense>

namespace chainbinom::numerics {

struct OptimResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ScalarObjective = std::function<double(double)>;
using VectorObjective = std::function<double(const Eigen::VectorXd&)>;

/// Brent's golden-section / parabolic search on [lower, upper]. The endpoints
/// are probed after the interior search so monotone objectives return the
/// exact boundary. Throws EvaluationError on a non-finite objective value.
OptimResult minimize_scalar(const ScalarObjective& objective, double lower, double upper,
                            double tol, int max_iter = 500);

struct SimplexOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  /// Initial simplex edge along coordinate j is step * max(1, |start_j|).
  double step = 0.1;
  /// Restarts from the best vertex; stops early once a restart no longer
  /// improves the objective.
  int restarts = 2;
};

/// Nelder-Mead simplex descent. +inf objective values mark infeasible points
/// and are rejected; NaN raises EvaluationError. Hitting the iteration cap
/// returns the best vertex with converged = false.
OptimResult minimize_multivariate(const VectorObjective& objective, const Eigen::VectorXd& start,
                                  const SimplexOptions& options = {});

/// Central-difference Hessian with per-coordinate step max(1e-5, 1e-4 |x_j|).
/// Off-diagonal entries are averaged, so the result is symmetric.
Eigen::MatrixXd hessian_fd(const VectorObjective& objective, const Eigen::VectorXd& point);

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF, accurate to well below 1e-8.
double normal_quantile(double p);

/// Inverse chi-square(1) CDF, computed as normal_quantile((1 + p) / 2)^2.
double chisq1_quantile(double p);

}  // namespace chainbinom::numerics
