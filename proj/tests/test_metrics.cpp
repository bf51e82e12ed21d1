#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pielm/metrics.hpp"
#include "pielm/pde_problem.hpp"

using namespace pielm;

TEST_CASE("seed bundles shift by 1000 per repeat") {
    const SeedBundle defaults;
    CHECK(defaults.weights == 1);
    CHECK(defaults.collocation == 2);
    CHECK(defaults.boundary_mc == 3);
    CHECK(defaults.test == 4);
    CHECK(defaults.oracle == 5);

    const SeedBundle base{10, 20, 30, 40, 50};
    const SeedBundle r2 = base.for_repeat(2);
    CHECK(r2.weights == 2010);
    CHECK(r2.collocation == 2020);
    CHECK(r2.boundary_mc == 2030);
    CHECK(r2.test == 2040);
    CHECK(r2.oracle == 2050);

    const SeedBundle r0 = base.for_repeat(0);
    CHECK(r0.weights == 10);
    CHECK(r0.oracle == 50);
}

TEST_CASE("oracle mode names round-trip") {
    CHECK(parse_oracle_mode("per_point") == OracleMode::per_point);
    CHECK(parse_oracle_mode("shared_noise") == OracleMode::shared_noise);
    CHECK(oracle_mode_name(OracleMode::per_point) == std::string("per_point"));
    CHECK(oracle_mode_name(OracleMode::shared_noise) == std::string("shared_noise"));
    CHECK_THROWS_AS(parse_oracle_mode("perpoint"), std::invalid_argument);
}

TEST_CASE("quantiles interpolate between order statistics") {
    const std::vector<double> values{4.0, 1.0, 3.0, 2.0};
    CHECK(median(values) == Catch::Approx(2.5).margin(1e-15));
    CHECK(quantile(values, 0.25) == Catch::Approx(1.75).margin(1e-15));
    CHECK(quantile(values, 0.75) == Catch::Approx(3.25).margin(1e-15));
    CHECK(interquartile_range(values) == Catch::Approx(1.5).margin(1e-15));
    CHECK(quantile(values, 0.0) == 1.0);
    CHECK(quantile(values, 1.0) == 4.0);
    CHECK(quantile({7.5}, 0.3) == 7.5);
    CHECK(median({7.5}) == 7.5);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({1.0}, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({1.0}, -0.5), std::invalid_argument);
}

TEST_CASE("log-log slope fits are exact on power laws") {
    const std::vector<double> widths{100.0, 200.0, 400.0, 800.0};
    std::vector<double> errors(widths.size());
    for (std::size_t i = 0; i < widths.size(); ++i) {
        errors[i] = 3.7 * std::pow(widths[i], -1.37);
    }
    const auto slope = fit_log_log_slope(widths, errors);
    REQUIRE(slope.has_value());
    CHECK(*slope == Catch::Approx(-1.37).margin(1e-12));

    // The prefactor only moves the intercept.
    for (double& e : errors) e *= 7.0;
    const auto scaled = fit_log_log_slope(widths, errors);
    REQUIRE(scaled.has_value());
    CHECK(*scaled == Catch::Approx(-1.37).margin(1e-12));

    CHECK_FALSE(fit_log_log_slope({100.0}, {0.5}).has_value());
    CHECK_FALSE(fit_log_log_slope({100.0, 200.0}, {0.5, 0.0}).has_value());
    CHECK_FALSE(fit_log_log_slope({100.0, 200.0}, {0.5, -0.1}).has_value());
    CHECK_FALSE(fit_log_log_slope({100.0, 100.0}, {0.5, 0.4}).has_value());
    CHECK_THROWS_AS(fit_log_log_slope({100.0, 200.0}, {0.5}), std::invalid_argument);
}

TEST_CASE("a network evaluated against itself has zero error") {
    PdeProblem problem = make_heat_problem(2);
    FeatureNetwork net = FeatureNetwork::init_random(3, 20, Activation::tanh(), -0.8, 0.8, 10);
    rng::Engine eng = rng::substream(11, rng::Stream::weights);
    Eigen::VectorXd w(20);
    for (int i = 0; i < 20; ++i) w(i) = rng::uniform(eng, -1.0, 1.0);
    net.set_output_weights(w);
    problem.reference = ExactReference{[&net](const Eigen::VectorXd& x, double t) {
        Eigen::MatrixXd pt(1, 3);
        pt << x(0), x(1), t;
        return net.eval_network(pt)(0);
    }};

    const ErrorReport report = evaluate_error(problem, net, 50, SeedBundle{});
    CHECK(report.n_test == 50);
    CHECK(report.l2_error < 1e-10);
    CHECK(report.relative_l2 < 1e-8);
    CHECK(report.mc_se_rel == 0.0);
    CHECK(report.error.size() == 50);
    CHECK(report.reference.size() == 50);
    CHECK(report.wall_time_seconds >= 0.0);
}

TEST_CASE("a zero network has unit relative error") {
    const PdeProblem problem = make_heat_problem(3);
    FeatureNetwork net = FeatureNetwork::init_random(4, 10, Activation::sigmoid(), -1.0, 1.0, 12);
    net.set_output_weights(Eigen::VectorXd::Zero(10));
    const ErrorReport report = evaluate_error(problem, net, 200, SeedBundle{});
    CHECK(report.relative_l2 == 1.0);
    CHECK(report.l2_error == report.reference_l2);
    // Aggregates are recomputable from the retained per-point values.
    CHECK(report.l2_error ==
          std::sqrt(report.error.squaredNorm() / static_cast<double>(report.n_test)));
}

TEST_CASE("error evaluation is deterministic in the seeds") {
    const PdeProblem problem = make_heat_problem(2);
    FeatureNetwork net = FeatureNetwork::init_random(3, 15, Activation::tanh(), -0.5, 0.5, 13);
    rng::Engine eng = rng::substream(14, rng::Stream::weights);
    Eigen::VectorXd w(15);
    for (int i = 0; i < 15; ++i) w(i) = rng::uniform(eng, -1.0, 1.0);
    net.set_output_weights(w);

    const ErrorReport a = evaluate_error(problem, net, 100, SeedBundle{});
    const ErrorReport b = evaluate_error(problem, net, 100, SeedBundle{});
    CHECK(a.l2_error == b.l2_error);
    CHECK(a.relative_l2 == b.relative_l2);
    CHECK(a.error == b.error);

    SeedBundle other;
    other.test = 99;
    const ErrorReport c = evaluate_error(problem, net, 100, other);
    CHECK(a.l2_error != c.l2_error);
}

TEST_CASE("monte-carlo reference noise shrinks with the sample budget") {
    const PdeProblem problem = make_black_scholes_problem(1);
    FeatureNetwork net = FeatureNetwork::init_random(2, 12, Activation::tanh(), -0.1, 0.1, 15);
    rng::Engine eng = rng::substream(16, rng::Stream::weights);
    Eigen::VectorXd w(12);
    for (int i = 0; i < 12; ++i) w(i) = rng::uniform(eng, -2.0, 2.0);
    net.set_output_weights(w);

    const ErrorReport coarse =
        evaluate_error(problem, net, 200, SeedBundle{}, {256, OracleMode::per_point});
    const ErrorReport fine =
        evaluate_error(problem, net, 200, SeedBundle{}, {1024, OracleMode::per_point});
    REQUIRE(coarse.mc_se_rel > 0.0);
    REQUIRE(fine.mc_se_rel > 0.0);
    // Quadrupling the budget should halve the standard error.
    CHECK(fine.mc_se_rel / coarse.mc_se_rel > 0.3);
    CHECK(fine.mc_se_rel / coarse.mc_se_rel < 0.7);

    const ErrorReport shared =
        evaluate_error(problem, net, 200, SeedBundle{}, {1024, OracleMode::shared_noise});
    CHECK(shared.mc_se_rel > 0.0);
    CHECK(shared.reference_l2 == Catch::Approx(fine.reference_l2).epsilon(0.1));
    const ErrorReport shared_again =
        evaluate_error(problem, net, 200, SeedBundle{}, {1024, OracleMode::shared_noise});
    CHECK(shared.relative_l2 == shared_again.relative_l2);
}

TEST_CASE("evaluation rejects unusable configurations") {
    const PdeProblem heat = make_heat_problem(2);
    FeatureNetwork net = FeatureNetwork::init_random(3, 8, Activation::tanh(), -0.5, 0.5, 17);
    net.set_output_weights(Eigen::VectorXd::Zero(8));
    CHECK_THROWS_AS(evaluate_error(heat, net, 0, SeedBundle{}), std::invalid_argument);

    PdeProblem blank = make_heat_problem(2);
    blank.reference = NoReference{};
    CHECK_THROWS_AS(evaluate_error(blank, net, 10, SeedBundle{}), std::invalid_argument);

    const PdeProblem bs = make_black_scholes_problem(1);
    FeatureNetwork bs_net =
        FeatureNetwork::init_random(2, 8, Activation::tanh(), -0.1, 0.1, 18);
    bs_net.set_output_weights(Eigen::VectorXd::Zero(8));
    CHECK_THROWS_AS(evaluate_error(bs, bs_net, 10, SeedBundle{}, {0, OracleMode::per_point}),
                    std::invalid_argument);
}
