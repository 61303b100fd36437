#include "chainbinom/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "chainbinom/errors.hpp"

namespace chainbinom::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double checked(double value, const char* where) {
  if (!std::isfinite(value)) {
    throw EvaluationError(std::string("non-finite objective value in ") + where);
  }
  return value;
}

}  // namespace

OptimResult minimize_scalar(const ScalarObjective& objective, double lower, double upper,
                            double tol, int max_iter) {
  if (!(lower < upper)) throw DomainError("minimize_scalar requires lower < upper");
  if (!(tol > 0.0)) throw DomainError("minimize_scalar requires tol > 0");

  auto f = [&](double x) { return checked(objective(x), "minimize_scalar"); };

  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lower;
  double b = upper;
  double x = a + golden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;

  OptimResult result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = 2.0 * kEps * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      result.converged = true;
      break;
    }
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) {
        a = x;
      } else {
        b = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }

  // Brent never evaluates the endpoints themselves.
  for (double edge : {lower, upper}) {
    const double fe = f(edge);
    if (fe < fx) {
      x = edge;
      fx = fe;
    }
  }

  result.argmin = Eigen::VectorXd::Constant(1, x);
  result.value = fx;
  result.iterations = iter;
  return result;
}

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> vertices;
  std::vector<double> values;
};

double simplex_value(const VectorObjective& objective, const Eigen::VectorXd& x) {
  const double v = objective(x);
  if (std::isnan(v)) throw EvaluationError("NaN objective value in minimize_multivariate");
  // -inf would be an unbounded objective; treat it like NaN.
  if (v == -std::numeric_limits<double>::infinity()) {
    throw EvaluationError("objective unbounded below in minimize_multivariate");
  }
  return v;
}

OptimResult nelder_mead(const VectorObjective& objective, const Eigen::VectorXd& start,
                        const SimplexOptions& options, int budget) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const Eigen::Index n = start.size();
  Simplex s;
  s.vertices.push_back(start);
  s.values.push_back(simplex_value(objective, start));
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd x = start;
    x[j] += options.step * std::max(1.0, std::abs(start[j]));
    s.vertices.push_back(x);
    s.values.push_back(simplex_value(objective, x));
  }

  std::vector<std::size_t> order(n + 1);
  OptimResult result;
  int iter = 0;
  for (;; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return s.values[i] < s.values[j]; });
    {
      Simplex sorted;
      for (std::size_t i : order) {
        sorted.vertices.push_back(s.vertices[i]);
        sorted.values.push_back(s.values[i]);
      }
      s = std::move(sorted);
    }

    double spread = s.values.back() - s.values.front();
    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      diameter = std::max(diameter, (s.vertices[i] - s.vertices[0]).lpNorm<Eigen::Infinity>());
    }
    if (spread <= options.tol && diameter <= options.tol) {
      result.converged = true;
      break;
    }
    if (iter >= budget) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += s.vertices[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd& worst = s.vertices[n];
    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - worst);
    const double f_reflected = simplex_value(objective, reflected);

    if (f_reflected < s.values[0]) {
      const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = simplex_value(objective, expanded);
      if (f_expanded < f_reflected) {
        s.vertices[n] = expanded;
        s.values[n] = f_expanded;
      } else {
        s.vertices[n] = reflected;
        s.values[n] = f_reflected;
      }
      continue;
    }
    if (f_reflected < s.values[n - 1]) {
      s.vertices[n] = reflected;
      s.values[n] = f_reflected;
      continue;
    }
    if (f_reflected < s.values[n]) {
      const Eigen::VectorXd outside = centroid + kContract * (reflected - centroid);
      const double f_outside = simplex_value(objective, outside);
      if (f_outside <= f_reflected) {
        s.vertices[n] = outside;
        s.values[n] = f_outside;
        continue;
      }
    } else {
      const Eigen::VectorXd inside = centroid + kContract * (worst - centroid);
      const double f_inside = simplex_value(objective, inside);
      if (f_inside < s.values[n]) {
        s.vertices[n] = inside;
        s.values[n] = f_inside;
        continue;
      }
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      s.vertices[i] = s.vertices[0] + kShrink * (s.vertices[i] - s.vertices[0]);
      s.values[i] = simplex_value(objective, s.vertices[i]);
    }
  }

  result.argmin = s.vertices[0];
  result.value = s.values[0];
  result.iterations = iter;
  return result;
}

}  // namespace

OptimResult minimize_multivariate(const VectorObjective& objective, const Eigen::VectorXd& start,
                                  const SimplexOptions& options) {
  if (start.size() == 0) throw DomainError("minimize_multivariate needs at least one coordinate");
  if (!start.allFinite()) throw DomainError("minimize_multivariate start must be finite");
  if (!(options.tol > 0.0)) throw DomainError("minimize_multivariate requires tol > 0");

  OptimResult best = nelder_mead(objective, start, options, options.max_iter);
  int used = best.iterations;
  for (int r = 0; r < options.restarts && best.converged && used < options.max_iter; ++r) {
    OptimResult again = nelder_mead(objective, best.argmin, options, options.max_iter - used);
    used += again.iterations;
    const bool improved = again.value < best.value - options.tol;
    if (again.value <= best.value) {
      again.iterations = used;
      best = std::move(again);
    }
    if (!improved) break;
  }
  best.iterations = used;
  return best;
}

Eigen::MatrixXd hessian_fd(const VectorObjective& objective, const Eigen::VectorXd& point) {
  const Eigen::Index n = point.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index j = 0; j < n; ++j) h[j] = std::max(1e-5, 1e-4 * std::abs(point[j]));

  auto f = [&](const Eigen::VectorXd& x) { return checked(objective(x), "hessian_fd"); };
  const double f0 = f(point);

  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd up = point;
    Eigen::VectorXd down = point;
    up[i] += h[i];
    down[i] -= h[i];
    hess(i, i) = (f(up) - 2.0 * f0 + f(down)) / (h[i] * h[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = point, pm = point, mp = point, mm = point;
      pp[i] += h[i], pp[j] += h[j];
      pm[i] += h[i], pm[j] -= h[j];
      mp[i] -= h[i], mp[j] += h[j];
      mm[i] -= h[i], mm[j] -= h[j];
      const double mixed = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      hess(i, j) = mixed;
      hess(j, i) = mixed;
    }
  }
  return hess;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  // Acklam's rational approximation (relative error ~1e-9) ...
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // ... followed by one Halley step against the erfc-based CDF.
  const double err = normal_cdf(x) - p;
  const double u = err * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double chisq1_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("chisq1_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  const double z = normal_quantile(0.5 * (1.0 + p));
  return z * z;
}

}  // namespace chainbinom::numerics
