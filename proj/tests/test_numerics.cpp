#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "chainbinom/errors.hpp"
#include "chainbinom/numerics.hpp"
#include "oracles.hpp"

using namespace chainbinom;
using namespace chainbinom::numerics;

TEST_CASE("scalar minimization") {
  const auto quad = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-8);
  CHECK(std::abs(quad.argmin[0] - 0.3) <= 1e-8);
  CHECK(quad.converged);

  const auto binom = minimize_scalar(
      [](double p) { return -(7 * std::log(p) + 3 * std::log1p(-p)); }, 1e-9, 1 - 1e-9, 1e-10);
  CHECK(std::abs(binom.argmin[0] - 0.7) <= 1e-8);

  const auto mono = minimize_scalar([](double x) { return -x; }, 0.0, 1.0, 1e-10);
  CHECK(mono.argmin[0] == 1.0);
  CHECK(mono.converged);
  const auto mono_low = minimize_scalar([](double x) { return x; }, 0.0, 1.0, 1e-10);
  CHECK(mono_low.argmin[0] == 0.0);
}

TEST_CASE("scalar minimization on unimodal functions") {
  struct Case {
    double (*f)(double);
    double lower, upper, argmin;
  };
  const Case cases[] = {
      {[](double x) { return std::cosh(x - 1.25); }, -3.0, 4.0, 1.25},
      {[](double x) { return std::abs(x + 0.4); }, -2.0, 2.0, -0.4},
      {[](double x) { return std::pow(x - 2.0, 4); }, 0.0, 5.0, 2.0},
      {[](double x) { return x * std::log(x) ; }, 1e-6, 2.0, std::exp(-1.0)},
  };
  for (const auto& c : cases) {
    const auto r = minimize_scalar(c.f, c.lower, c.upper, 1e-9);
    // Quartic minima are flat: tolerance in x scales with tol^(1/4) in f.
    CHECK(std::abs(r.argmin[0] - c.argmin) <= 2e-3);
    CHECK(r.value <= c.f(c.argmin) + 1e-8);
  }
  const auto sharp = minimize_scalar([](double x) { return std::abs(x - 0.123456); }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(sharp.argmin[0] - 0.123456) <= 1e-8);
}

TEST_CASE("scalar minimization errors") {
  CHECK_THROWS_AS(minimize_scalar([](double) { return 1.0; }, 1.0, 0.0, 1e-8), DomainError);
  CHECK_THROWS_AS(minimize_scalar([](double) { return 1.0; }, 0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(
      minimize_scalar([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, 1.0,
                      1e-8),
      EvaluationError);
}

TEST_CASE("simplex minimization") {
  const auto bowl = minimize_multivariate(
      [](const Eigen::VectorXd& b) { return (b - Eigen::Vector2d(1.0, -2.0)).squaredNorm(); },
      Eigen::Vector2d(0.0, 0.0));
  CHECK(bowl.converged);
  CHECK(std::abs(bowl.argmin[0] - 1.0) <= 1e-5);
  CHECK(std::abs(bowl.argmin[1] + 2.0) <= 1e-5);

  const auto flat = minimize_multivariate([](const Eigen::VectorXd&) { return 3.0; },
                                          Eigen::Vector3d(0.5, -1.0, 2.0));
  CHECK(flat.converged);
  CHECK(flat.value == 3.0);
  CHECK((flat.argmin - Eigen::Vector3d(0.5, -1.0, 2.0)).norm() == 0.0);

  auto rosen = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const Eigen::Vector2d start(-1.2, 1.0);
  const auto r = minimize_multivariate(rosen, start);
  CHECK(r.value <= rosen(start));
  CHECK(std::abs(r.argmin[0] - 1.0) <= 1e-3);
  CHECK(std::abs(r.argmin[1] - 1.0) <= 1e-3);
}

TEST_CASE("simplex iteration cap") {
  SimplexOptions opt;
  opt.max_iter = 5;
  opt.restarts = 0;
  auto f = [](const Eigen::VectorXd& x) { return std::pow(x[0] - 3.0, 2) + std::pow(x[1] + 1, 2); };
  const Eigen::Vector2d start(0.0, 0.0);
  const auto r = minimize_multivariate(f, start, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.value <= f(start));
}

TEST_CASE("simplex rejects infeasible points and NaN") {
  // +inf marks the infeasible region x < 0.
  auto f = [](const Eigen::VectorXd& x) {
    return x[0] < 0.0 ? std::numeric_limits<double>::infinity() : std::pow(x[0] - 0.5, 2);
  };
  const auto r = minimize_multivariate(f, Eigen::VectorXd::Constant(1, 0.01));
  CHECK(std::abs(r.argmin[0] - 0.5) <= 1e-5);
  CHECK_THROWS_AS(minimize_multivariate(
                      [](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); },
                      Eigen::VectorXd::Zero(2)),
                  EvaluationError);
}

TEST_CASE("finite difference hessian") {
  const auto h1 = hessian_fd([](const Eigen::VectorXd& x) { return x[0] * x[0]; },
                             Eigen::VectorXd::Zero(1));
  CHECK(std::abs(h1(0, 0) - 2.0) <= 1e-4);

  const auto h2 = hessian_fd(
      [](const Eigen::VectorXd& v) { return v[0] * v[0] + 3 * v[1] * v[1] + v[0] * v[1]; },
      Eigen::VectorXd::Zero(2));
  CHECK(std::abs(h2(0, 0) - 2.0) <= 1e-3);
  CHECK(std::abs(h2(1, 1) - 6.0) <= 1e-3);
  CHECK(std::abs(h2(0, 1) - 1.0) <= 1e-3);
  CHECK(h2(0, 1) == h2(1, 0));

  const int n = 40, k = 13;
  const double p = static_cast<double>(k) / n;
  const auto hb = hessian_fd(
      [&](const Eigen::VectorXd& q) { return -(k * std::log(q[0]) + (n - k) * std::log1p(-q[0])); },
      Eigen::VectorXd::Constant(1, p));
  const double fisher = n / (p * (1 - p));
  CHECK(std::abs(hb(0, 0) - fisher) <= 1e-3 * fisher);
}

TEST_CASE("hessian of quadratic forms") {
  Eigen::Matrix3d a;
  a << 4.0, 1.0, -0.5, 1.0, 3.0, 0.25, -0.5, 0.25, 2.0;
  for (const Eigen::Vector3d at : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2.0, -3.0, 5.0)}) {
    const auto h = hessian_fd([&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x); }, at);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(std::abs(h(i, j) - a(i, j)) <= 1e-6 * std::abs(a(i, j)));
    }
  }
}

TEST_CASE("normal quantile") {
  CHECK(std::abs(normal_quantile(0.5)) <= 1e-15);
  CHECK(std::abs(normal_quantile(0.975) - 1.959964) <= 5e-7);
  CHECK(std::abs(normal_quantile(0.9) - 1.281552) <= 5e-7);
  for (double p : {1e-10, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.99, 1 - 1e-6}) {
    CAPTURE(p);
    CHECK(std::abs(normal_quantile(p) - oracle::normal_quantile_bisect(p)) <= 1e-8);
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 999; ++k) {
    const double q = normal_quantile(k / 1000.0);
    CHECK(q > prev);
    prev = q;
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(std::abs(normal_cdf(1.959963984540054) - 0.975) <= 1e-12);
  CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("chi-square(1) quantile") {
  CHECK(std::abs(chisq1_quantile(0.95) - 3.841459) <= 1e-6);
  CHECK(std::abs(chisq1_quantile(0.99) - 6.634897) <= 1e-6);
  for (int k = 1; k < 100; ++k) {
    const double p = k / 100.0;
    CHECK(std::abs(chisq1_quantile(p) - std::pow(normal_quantile(0.5 * (1 + p)), 2)) <= 1e-12);
  }
  CHECK(chisq1_quantile(1e-12) > 0.0);
  CHECK(chisq1_quantile(1e-12) < 1e-20);
  CHECK_THROWS_AS(chisq1_quantile(0.0), DomainError);
  CHECK_THROWS_AS(chisq1_quantile(1.0), DomainError);
}
