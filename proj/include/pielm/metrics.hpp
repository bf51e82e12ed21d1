#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pielm/feature_network.hpp"
#include "pielm/pde_problem.hpp"
#include "pielm/sampling.hpp"

namespace pielm {

/// All randomness a pipeline run consumes, one seed per purpose. Repeats of
/// the same experiment shift every seed by 1000 per repeat index.
struct SeedBundle {
    std::uint64_t weights = 1;
    std::uint64_t collocation = 2;
    std::uint64_t boundary_mc = 3;
    std::uint64_t test = 4;
    std::uint64_t oracle = 5;

    SeedBundle for_repeat(int repeat) const {
        const std::uint64_t shift = 1000ULL * static_cast<std::uint64_t>(repeat);
        return SeedBundle{weights + shift, collocation + shift, boundary_mc + shift,
                          test + shift, oracle + shift};
    }
};

/// How Monte-Carlo reference values are produced: per_point draws a fresh
/// substream of n_samples per test point; shared_noise reuses one bank of
/// n_samples draws across all test points (cheaper, correlated across
/// points, still unbiased per point).
enum class OracleMode { per_point, shared_noise };

inline OracleMode parse_oracle_mode(const std::string& name) {
    if (name == "per_point") return OracleMode::per_point;
    if (name == "shared_noise") return OracleMode::shared_noise;
    throw std::invalid_argument("unknown oracle mode \"" + name +
                                "\" (expected per_point or shared_noise)");
}

inline const char* oracle_mode_name(OracleMode mode) {
    return mode == OracleMode::per_point ? "per_point" : "shared_noise";
}

struct OracleSettings {
    std::int64_t n_samples = 16384;
    OracleMode mode = OracleMode::per_point;
};

/// Discrete L2 errors over a random test set. Per-point errors and reference
/// values are retained so every aggregate is recomputable from the report.
struct ErrorReport {
    double l2_error = 0.0;       // sqrt(mean of squared errors)
    double relative_l2 = 0.0;    // l2_error / reference_l2
    double reference_l2 = 0.0;   // sqrt(mean of squared reference values)
    double mc_se_rel = 0.0;      // MC-noise standard error of relative_l2 (0 for exact refs)
    Eigen::Index n_test = 0;
    double wall_time_seconds = 0.0;
    SeedBundle seeds;
    Eigen::VectorXd error;       // signed per-point network - reference
    Eigen::VectorXd reference;   // per-point reference values
};

/// Evaluates the trained network against the problem's reference solution on
/// n_test uniform space-time points drawn from seeds.test. Monte-Carlo
/// references use seeds.oracle with the budget and mode in oracle.
inline ErrorReport evaluate_error(const PdeProblem& problem, const FeatureNetwork& net,
                                  std::int64_t n_test, const SeedBundle& seeds,
                                  const OracleSettings& oracle = {}) {
    if (n_test < 1) throw std::invalid_argument("n_test must be >= 1");
    if (std::holds_alternative<NoReference>(problem.reference)) {
        throw std::invalid_argument("problem \"" + problem.name +
                                    "\" has no reference solution to evaluate against");
    }
    const auto start = std::chrono::steady_clock::now();
    const int d = problem.dim();
    const Eigen::MatrixXd points = sample_test_set(problem.domain, n_test, seeds.test);
    const Eigen::VectorXd network_values =
        net.eval_network(problem.normalization.network_inputs(points));

    Eigen::VectorXd reference(n_test);
    Eigen::VectorXd reference_se = Eigen::VectorXd::Zero(n_test);
    if (const auto* exact = std::get_if<ExactReference>(&problem.reference)) {
        for (Eigen::Index p = 0; p < n_test; ++p) {
            reference(p) = exact->values(points.row(p).head(d), points(p, d));
        }
    } else {
        const auto& mc = std::get<McOracleReference>(problem.reference);
        if (oracle.n_samples < 1) {
            throw std::invalid_argument("oracle n_samples must be >= 1 for MC references");
        }
        const McStats stats =
            oracle.mode == OracleMode::per_point
                ? mc_sample_means(points, mc.model, problem.initial_values, oracle.n_samples,
                                  seeds.oracle, rng::Stream::oracle_mc)
                : mc_sample_means_shared(points, mc.model, problem.initial_values,
                                         oracle.n_samples, seeds.oracle,
                                         rng::Stream::oracle_mc);
        reference = stats.mean;
        reference_se = stats.standard_error;
    }

    ErrorReport report;
    report.n_test = n_test;
    report.seeds = seeds;
    report.error = network_values - reference;
    report.reference = reference;
    const double n = static_cast<double>(n_test);
    report.l2_error = std::sqrt(report.error.squaredNorm() / n);
    report.reference_l2 = std::sqrt(reference.squaredNorm() / n);
    if (report.reference_l2 > 0.0) {
        report.relative_l2 = report.l2_error / report.reference_l2;
    } else {
        report.relative_l2 = report.l2_error > 0.0
                                 ? std::numeric_limits<double>::infinity()
                                 : 0.0;
    }
    // First-order propagation of reference noise through relative_l2: with
    // e_p perturbed by se_p, var(l2) ~ sum (e_p se_p)^2 / (n l2)^2.
    if (report.l2_error > 0.0 && report.reference_l2 > 0.0) {
        const double sum = (report.error.array() * reference_se.array()).square().sum();
        report.mc_se_rel = std::sqrt(sum) / (n * report.l2_error * report.reference_l2);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(const std::vector<double>& values) { return quantile(values, 0.5); }

inline double interquartile_range(const std::vector<double>& values) {
    return quantile(values, 0.75) - quantile(values, 0.25);
}

/// Least-squares slope of log(error) against log(width); absent with fewer
/// than two points or nonpositive values.
inline std::optional<double> fit_log_log_slope(const std::vector<double>& widths,
                                               const std::vector<double>& errors) {
    if (widths.size() != errors.size()) {
        throw std::invalid_argument("slope fit needs matching widths and errors");
    }
    if (widths.size() < 2) return std::nullopt;
    const std::size_t n = widths.size();
    double mean_x = 0.0, mean_y = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(widths[i] > 0.0) || !(errors[i] > 0.0)) return std::nullopt;
        xs[i] = std::log(widths[i]);
        ys[i] = std::log(errors[i]);
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xs[i] - mean_x) * (ys[i] - mean_y);
        den += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

}  // namespace pielm
