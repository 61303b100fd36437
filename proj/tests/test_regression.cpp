#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "chainbinom/dataset.hpp"
#include "chainbinom/errors.hpp"
#include "chainbinom/regression.hpp"
#include "chainbinom/simulation.hpp"

using namespace chainbinom;

namespace {

std::vector<HouseholdObservation> fixture() { return coronahouse_fixture().records; }

std::vector<HouseholdObservation> subset(const std::string& variant) {
  return filter_records(fixture(), "variant", variant);
}

CovariateMap variant(const std::string& v) { return CovariateMap{{"variant", v}}; }

}  // namespace

TEST_CASE("link functions round trip") {
  for (auto kind : {Link::logit, Link::log, Link::identity}) {
    const LinkFunction link(kind);
    CHECK(LinkFunction::from_name(link.name()).kind() == kind);
    for (double p : {1e-6, 0.01, 0.28, 0.5, 0.61, 0.99, 1 - 1e-6}) {
      CHECK(std::abs(link.inverse(link.apply(p)) - p) <= 1e-12);
    }
  }
  CHECK(LinkFunction(Link::logit).inverse(50.0) <= 1.0);
  CHECK(LinkFunction(Link::logit).inverse(-50.0) >= 0.0);
  CHECK_THROWS_AS(LinkFunction::from_name("probit"), DomainError);
}

TEST_CASE("design matrix coding") {
  const auto data = fixture();
  const auto empty = design_matrix(data, {});
  CHECK(empty.matrix().cols() == 1);
  CHECK(empty.matrix().rows() == static_cast<Eigen::Index>(data.size()));
  CHECK(empty.matrix().isOnes());

  const auto coded = design_matrix(data, {"variant"});
  REQUIRE(coded.column_names() == std::vector<std::string>{"intercept", "variant=nonvoc"});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool nonvoc = std::get<std::string>(data[i].covariates.at("variant")) == "nonvoc";
    CHECK(coded.matrix()(static_cast<Eigen::Index>(i), 1) == (nonvoc ? 1.0 : 0.0));
  }

  DesignOptions ref;
  ref.reference_levels["variant"] = "nonvoc";
  CHECK(design_matrix(data, {"variant"}, ref).column_names()[1] == "variant=alpha");

  auto numeric = data;
  for (std::size_t i = 0; i < numeric.size(); ++i) numeric[i].covariates["age"] = 10.0 + i;
  const auto x = design_matrix(numeric, {"age"});
  CHECK(x.column_names()[1] == "age");
  CHECK(x.matrix()(3, 1) == 13.0);
}

TEST_CASE("design matrix errors") {
  auto data = fixture();
  data[4].covariates.erase("variant");
  CHECK_THROWS_WITH_AS(design_matrix(data, {"variant"}), doctest::Contains("ch05"), DataError);
  CHECK_THROWS_AS(design_matrix(fixture(), {"age"}), DataError);
  DesignOptions bad;
  bad.reference_levels["variant"] = "delta";
  CHECK_THROWS_AS(design_matrix(fixture(), {"variant"}, bad), DataError);
}

TEST_CASE("glm log likelihood identities") {
  const auto data = fixture();
  const auto x1 = design_matrix(data, {}).matrix();
  const LinkFunction logit(Link::logit);
  for (double a : {0.2, 0.45, 0.8}) {
    CHECK(glm_log_likelihood(data, x1, Eigen::VectorXd::Constant(1, logit.apply(a)), logit) ==
          doctest::Approx(log_likelihood(data, a)).epsilon(1e-12));
  }

  const auto x = design_matrix(data, {"variant"}).matrix();
  const LinkFunction identity(Link::identity);
  CHECK(glm_log_likelihood(data, x, Eigen::Vector2d(0.61, -0.33), identity) ==
        doctest::Approx(log_likelihood(subset("alpha"), 0.61) + log_likelihood(subset("nonvoc"), 0.28))
            .epsilon(1e-12));
  CHECK(glm_log_likelihood(data, x, Eigen::Vector2d(0.61, 0.5), identity) ==
        -std::numeric_limits<double>::infinity());
  CHECK(glm_log_likelihood(data, x, Eigen::Vector2d(0.1, -0.3), LinkFunction(Link::log)) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(glm_log_likelihood(data, x, Eigen::VectorXd::Zero(3), identity), DomainError);
}

TEST_CASE("intercept-only fits reproduce fit_sar") {
  for (const auto& data : {subset("nonvoc"), fixture()}) {
    const double sar = fit_sar(data).sar_hat;
    for (auto kind : {Link::logit, Link::log, Link::identity}) {
      const auto fit = fit_glm(data, {}, LinkFunction(kind));
      CHECK(fit.converged);
      CHECK(std::abs(fit.link.inverse(fit.coefficients[0]) - sar) <= 1e-5);
      CHECK(fit.loglik >= fit.start_loglik);
      CHECK(std::abs(predict_sar(fit, variant("anything")).sar - sar) <= 1e-5);
    }
  }
  const auto nonvoc = fit_glm(subset("nonvoc"), {}, LinkFunction(Link::logit));
  CHECK(std::abs(nonvoc.link.inverse(nonvoc.coefficients[0]) - 0.28) <= 0.01);
}

TEST_CASE("identity link variant effect") {
  const auto fit = fit_glm(fixture(), {"variant"}, LinkFunction(Link::identity));
  REQUIRE(fit.covariance);
  CHECK(fit.predictor_names == std::vector<std::string>{"intercept", "variant=nonvoc"});
  CHECK(std::abs(-fit.coefficients[1] - 0.33) <= 0.01);
  const auto ci = fit.coefficient_ci(1, 0.95);
  CHECK(std::abs(-ci.upper - 0.14) <= 0.02);
  CHECK(std::abs(-ci.lower - 0.53) <= 0.02);

  const double alpha = fit_sar(subset("alpha")).sar_hat;
  const double nonvoc = fit_sar(subset("nonvoc")).sar_hat;
  CHECK(std::abs(predict_sar(fit, variant("alpha")).sar - alpha) <= 1e-4);
  CHECK(std::abs(predict_sar(fit, variant("nonvoc")).sar - nonvoc) <= 1e-4);
  CHECK(std::abs(predict_sar(fit, variant("nonvoc")).sar - 0.28) <= 0.01);
  CHECK(std::abs(predict_sar(fit, variant("alpha")).sar - 0.61) <= 0.01);
  CHECK_THROWS_AS(predict_sar(fit, CovariateMap{}), DataError);

  const auto& cov = *fit.covariance;
  CHECK((cov - cov.transpose()).norm() == 0.0);
  CHECK(cov.diagonal().minCoeff() >= 0.0);
}

TEST_CASE("group fits factorize under every link") {
  const double alpha = fit_sar(subset("alpha")).sar_hat;
  const double nonvoc = fit_sar(subset("nonvoc")).sar_hat;
  for (auto kind : {Link::logit, Link::log}) {
    const auto fit = fit_glm(fixture(), {"variant"}, LinkFunction(kind));
    CHECK(std::abs(predict_sar(fit, variant("alpha")).sar - alpha) <= 1e-4);
    CHECK(std::abs(predict_sar(fit, variant("nonvoc")).sar - nonvoc) <= 1e-4);
  }
}

TEST_CASE("logit reference swap") {
  const LinkFunction logit(Link::logit);
  const auto a = fit_glm(fixture(), {"variant"}, logit);
  DesignOptions opt;
  opt.reference_levels["variant"] = "nonvoc";
  const auto b = fit_glm(fixture(), {"variant"}, logit, opt);
  CHECK(std::abs(a.coefficients[1] + b.coefficients[1]) <= 1e-4);
  CHECK(std::abs(a.coefficients[0] + a.coefficients[1] - b.coefficients[0]) <= 1e-4);
  CHECK(std::abs(*a.std_error(1) - *b.std_error(1)) <= 1e-3);
  CHECK(std::abs(a.loglik - b.loglik) <= 1e-9);
}

TEST_CASE("singular designs") {
  CHECK_THROWS_AS(fit_glm(fixture(), {"variant", "variant"}, LinkFunction()), SingularModelError);
  auto constant = fixture();
  for (auto& obs : constant) obs.covariates["k"] = 2.0;
  CHECK_THROWS_AS(fit_glm(constant, {"k"}, LinkFunction()), SingularModelError);
  auto zero = fixture();
  for (auto& obs : zero) obs.covariates["z"] = 0.0;
  CHECK_THROWS_AS(fit_glm(zero, {"z"}, LinkFunction()), SingularModelError);
  CHECK_THROWS_AS(fit_glm(std::vector<HouseholdObservation>{}, {}, LinkFunction()), DataError);
}

TEST_CASE("prediction clamping") {
  auto data = fixture();
  for (std::size_t i = 0; i < data.size(); ++i) data[i].covariates["x"] = static_cast<double>(i % 3);
  const auto fit = fit_glm(data, {"x"}, LinkFunction(Link::identity));
  const double slope = fit.coefficients[1];
  const auto far = predict_sar(fit, CovariateMap{{"x", slope > 0 ? 1e3 : -1e3}});
  CHECK(far.clamped);
  CHECK(far.sar == 1.0);
  CHECK_FALSE(predict_sar(fit, CovariateMap{{"x", 1.0}}).clamped);
}

TEST_CASE("null effect simulation") {
  SimConfig sim;
  sim.n_households = 100;
  sim.sar = 0.4;
  int within = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    Rng rng = substream(99, static_cast<std::uint64_t>(r));
    auto data = simulate_study(sim, rng);
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i].covariates["group"] = std::string(uniform01(rng) < 0.5 ? "a" : "b");
    }
    const auto fit = fit_glm(data, {"group"}, LinkFunction(Link::logit));
    REQUIRE(fit.std_error(1));
    if (std::abs(fit.coefficients[1]) <= 2.0 * *fit.std_error(1)) ++within;
  }
  CHECK(within >= 0.9 * reps);
}
