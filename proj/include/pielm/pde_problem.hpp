#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pielm/domain.hpp"
#include "pielm/feature_network.hpp"
#include "pielm/mc_models.hpp"
#include "pielm/multi_index.hpp"
#include "pielm/parallel.hpp"

namespace pielm {

using SpaceTimeFn = std::function<double(const Eigen::VectorXd& x, double t)>;
using SpaceFn = std::function<double(const Eigen::VectorXd& x)>;

/// One term c_alpha(x, t) * d^alpha u of a linear differential operator.
/// The multi-index runs over the physical coordinates (x_1..x_d, t); its
/// coefficient is evaluated at physical points.
struct OperatorTerm {
    MultiIndex alpha;
    SpaceTimeFn coeff;
};

/// Spatial boundary data: either a closed-form g(x, t) or a Feynman-Kac
/// sample mean whose sampling budget is supplied at assembly time.
struct DeterministicBoundary {
    SpaceTimeFn values;
};
struct McBoundary {
    McModel model;
};
using BoundaryData = std::variant<DeterministicBoundary, McBoundary>;

/// What errors are measured against: a closed-form solution, a Monte-Carlo
/// estimate of the Feynman-Kac expectation, or nothing.
struct ExactReference {
    SpaceTimeFn values;
};
struct McOracleReference {
    McModel model;
};
struct NoReference {};
using ReferenceSolution = std::variant<ExactReference, McOracleReference, NoReference>;

/// An initial-boundary value problem L[u] = f on the box, u = g on the
/// spatial boundary, u(., 0) = h, in a form the collocation assembly can
/// consume directly.
struct PdeProblem {
    std::string name;
    BoxDomain domain;
    Normalization normalization;
    std::vector<OperatorTerm> operator_terms;
    SpaceTimeFn rhs;            // f on the interior
    BoundaryData boundary;      // g on the spatial boundary
    SpaceFn initial_values;     // h at t = 0 (the payoff psi for the MC problems)
    ReferenceSolution reference;

    int dim() const { return domain.dim(); }

    int max_order() const {
        int order = 0;
        for (const auto& term : operator_terms) order = std::max(order, term.alpha.order());
        return order;
    }
};

/// L[phi_i](x_k, t_k) for every feature i and row k of points.
///
/// Residuals live in physical coordinates: coefficients are evaluated at the
/// physical (x, t) while the features are differentiated with respect to the
/// normalized network inputs, so each term picks up a chain-rule factor
/// prod_j scale_j^(-alpha_j). Time is not rescaled and contributes none.
inline Eigen::MatrixXd apply_operator(const PdeProblem& problem, const FeatureNetwork& net,
                                      const Eigen::MatrixXd& points,
                                      const DerivativeBackend& backend = AnalyticBackend{}) {
    const int d = problem.dim();
    if (net.input_dim() != d + 1) {
        throw std::invalid_argument("network input_dim " + std::to_string(net.input_dim()) +
                                    " does not match problem dimension " + std::to_string(d) +
                                    " plus time");
    }
    if (points.cols() != d + 1) {
        throw std::invalid_argument("points have " + std::to_string(points.cols()) +
                                    " columns, expected " + std::to_string(d + 1));
    }
    for (Eigen::Index k = 0; k < points.rows(); ++k) {
        if (!problem.domain.contains(points.row(k).head(d), points(k, d))) {
            throw std::invalid_argument("point " + std::to_string(k) +
                                        " lies outside the space-time domain");
        }
    }

    // Chain-rule factor and feature factor per term; the feature factor
    // prod_j a_ij^alpha_j is the same for every row of a term.
    const auto& terms = problem.operator_terms;
    std::vector<double> chain(terms.size(), 1.0);
    for (std::size_t m = 0; m < terms.size(); ++m) {
        for (int j = 0; j < d; ++j) {
            for (int rep = 0; rep < terms[m].alpha[j]; ++rep) {
                chain[m] /= problem.normalization.scale(j);
            }
        }
    }
    bool need[3] = {false, false, false};
    for (const auto& term : terms) need[term.alpha.order()] = true;

    const bool analytic = std::holds_alternative<AnalyticBackend>(backend);
    const Eigen::MatrixXd inputs = problem.normalization.network_inputs(points);
    const Eigen::MatrixXd& a = net.inner_weights();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), net.width());

    if (!analytic) {
        // The difference stencils act on the network inputs; each term is one
        // stencil sweep over the feature map.
        for (std::size_t m = 0; m < terms.size(); ++m) {
            Eigen::MatrixXd deriv = net.eval_feature_derivative(inputs, terms[m].alpha, backend);
            Eigen::VectorXd c(points.rows());
            for (Eigen::Index k = 0; k < points.rows(); ++k) {
                c(k) = terms[m].coeff(points.row(k).head(d), points(k, d)) * chain[m];
            }
            out.array() += deriv.array().colwise() * c.array();
        }
        return out;
    }

    parallel_for(0, points.rows(), [&](std::int64_t lo, std::int64_t hi) {
        const Eigen::Index len = hi - lo;
        Eigen::MatrixXd z =
            (inputs.middleRows(lo, len) * a.transpose()).rowwise() + net.biases().transpose();
        Eigen::MatrixXd s[3];
        net.activation().eval_levels(z, need[0] ? &s[0] : nullptr, need[1] ? &s[1] : nullptr,
                                     need[2] ? &s[2] : nullptr);
        Eigen::VectorXd c(len);
        for (std::size_t m = 0; m < terms.size(); ++m) {
            const MultiIndex& alpha = terms[m].alpha;
            Eigen::RowVectorXd factor = Eigen::RowVectorXd::Ones(net.width());
            for (int j = 0; j < alpha.size(); ++j) {
                for (int rep = 0; rep < alpha[j]; ++rep) {
                    factor.array() *= a.col(j).transpose().array();
                }
            }
            for (Eigen::Index k = 0; k < len; ++k) {
                c(k) = terms[m].coeff(points.row(lo + k).head(d), points(lo + k, d)) * chain[m];
            }
            out.middleRows(lo, len).array() += s[alpha.order()].array() * (c * factor).array();
        }
    });
    return out;
}

/// Heat equation u_t - Laplace(u) = 0 on [0,1]^d x [0,1], manufactured
/// solution u = |x|^2 / d + 2t supplying boundary and initial data.
inline PdeProblem make_heat_problem(int d) {
    if (d < 1) throw std::invalid_argument("heat problem dimension must be >= 1");
    BoxDomain domain = BoxDomain::cube(d, 0.0, 1.0, 1.0);
    SpaceTimeFn exact = [d](const Eigen::VectorXd& x, double t) {
        return x.squaredNorm() / static_cast<double>(d) + 2.0 * t;
    };
    std::vector<OperatorTerm> terms;
    terms.push_back({MultiIndex::first(d + 1, d), [](const Eigen::VectorXd&, double) {
                         return 1.0;
                     }});
    for (int j = 0; j < d; ++j) {
        terms.push_back({MultiIndex::second(d + 1, j), [](const Eigen::VectorXd&, double) {
                             return -1.0;
                         }});
    }
    PdeProblem problem{
        .name = "heat",
        .domain = domain,
        .normalization = Normalization::identity(d),
        .operator_terms = std::move(terms),
        .rhs = [](const Eigen::VectorXd&, double) { return 0.0; },
        .boundary = DeterministicBoundary{exact},
        .initial_values =
            [d](const Eigen::VectorXd& x) { return x.squaredNorm() / static_cast<double>(d); },
        .reference = ExactReference{exact},
    };
    return problem;
}

/// Default volatility ladder eps_i = 1/10 + i/200 for i = 1..d.
inline Eigen::VectorXd default_bs_volatility(int d) {
    Eigen::VectorXd eps(d);
    for (int i = 0; i < d; ++i) eps(i) = 0.1 + static_cast<double>(i + 1) / 200.0;
    return eps;
}

/// Black-Scholes pricing problem on [90,110]^d x [0,1] with rainbow payoff
/// psi(x) = max(max_i x_i - 100, 0):
///   u_t - 1/2 sum_i (eps_i x_i)^2 u_{x_i x_i} - mu sum_i x_i u_{x_i} = 0.
/// Spatial boundary data and the reference solution are Feynman-Kac
/// expectations of psi under the log-normal dynamics.
inline PdeProblem make_black_scholes_problem(int d, double mu = -0.05,
                                             Eigen::VectorXd volatility = Eigen::VectorXd()) {
    if (d < 1) throw std::invalid_argument("black-scholes dimension must be >= 1");
    if (volatility.size() == 0) volatility = default_bs_volatility(d);
    if (volatility.size() != d) {
        throw std::invalid_argument("volatility length " + std::to_string(volatility.size()) +
                                    " does not match dimension " + std::to_string(d));
    }
    BlackScholesModel model(mu, volatility);
    BoxDomain domain = BoxDomain::cube(d, 90.0, 110.0, 1.0);
    std::vector<OperatorTerm> terms;
    terms.push_back({MultiIndex::first(d + 1, d), [](const Eigen::VectorXd&, double) {
                         return 1.0;
                     }});
    for (int i = 0; i < d; ++i) {
        const double eps = volatility(i);
        terms.push_back({MultiIndex::second(d + 1, i),
                         [eps, i](const Eigen::VectorXd& x, double) {
                             const double sx = eps * x(i);
                             return -0.5 * sx * sx;
                         }});
        terms.push_back({MultiIndex::first(d + 1, i), [mu, i](const Eigen::VectorXd& x, double) {
                             return -mu * x(i);
                         }});
    }
    PdeProblem problem{
        .name = "black_scholes",
        .domain = domain,
        .normalization = Normalization::to_unit(domain),
        .operator_terms = std::move(terms),
        .rhs = [](const Eigen::VectorXd&, double) { return 0.0; },
        .boundary = McBoundary{model},
        .initial_values =
            [](const Eigen::VectorXd& x) { return std::max(x.maxCoeff() - 100.0, 0.0); },
        .reference = McOracleReference{model},
    };
    return problem;
}

/// Heston pricing problem on ([90,110] x [0.02,0.2])^(d/2) x [0,1] with
/// put-basket payoff psi(x) = max(110 - (2/d) sum of stock coordinates, 0).
/// Coordinates alternate stock and variance; per pair (s, v) the operator is
///   u_t - alpha s u_s - kappa (theta - v) u_v
///       - (|v|/2) s^2 u_ss - 2 s beta rho u_sv - beta^2 u_vv = 0.
/// Boundary data and the reference solution are sample means of psi over the
/// propagated (stock, variance) states.
inline PdeProblem make_heston_problem(int d, HestonModel model = HestonModel()) {
    if (d < 2 || d % 2 != 0) {
        throw std::invalid_argument("heston dimension must be even and >= 2");
    }
    Eigen::VectorXd lower(d), upper(d);
    for (int p = 0; p < d / 2; ++p) {
        lower(2 * p) = 90.0;
        upper(2 * p) = 110.0;
        lower(2 * p + 1) = 0.02;
        upper(2 * p + 1) = 0.2;
    }
    BoxDomain domain(std::move(lower), std::move(upper), 1.0);
    const double alpha = model.drift;
    const double beta = model.vol_of_vol;
    const double kappa = model.reversion;
    const double theta = model.long_run_var;
    const double rho = model.correlation;
    std::vector<OperatorTerm> terms;
    terms.push_back({MultiIndex::first(d + 1, d), [](const Eigen::VectorXd&, double) {
                         return 1.0;
                     }});
    for (int p = 0; p < d / 2; ++p) {
        const int s = 2 * p;
        const int v = 2 * p + 1;
        terms.push_back({MultiIndex::first(d + 1, s), [alpha, s](const Eigen::VectorXd& x, double) {
                             return -alpha * x(s);
                         }});
        terms.push_back(
            {MultiIndex::first(d + 1, v), [kappa, theta, v](const Eigen::VectorXd& x, double) {
                 return -kappa * (theta - x(v));
             }});
        terms.push_back(
            {MultiIndex::second(d + 1, s), [s, v](const Eigen::VectorXd& x, double) {
                 return -0.5 * std::abs(x(v)) * x(s) * x(s);
             }});
        terms.push_back(
            {MultiIndex::mixed(d + 1, s, v), [beta, rho, s](const Eigen::VectorXd& x, double) {
                 return -2.0 * x(s) * beta * rho;
             }});
        terms.push_back({MultiIndex::second(d + 1, v), [beta](const Eigen::VectorXd&, double) {
                             return -beta * beta;
                         }});
    }
    const double basket_weight = 2.0 / static_cast<double>(d);
    SpaceFn payoff = [d, basket_weight](const Eigen::VectorXd& x) {
        double basket = 0.0;
        for (int p = 0; p < d / 2; ++p) basket += x(2 * p);
        return std::max(110.0 - basket_weight * basket, 0.0);
    };
    PdeProblem problem{
        .name = "heston",
        .domain = domain,
        .normalization = Normalization::to_unit(domain),
        .operator_terms = std::move(terms),
        .rhs = [](const Eigen::VectorXd&, double) { return 0.0; },
        .boundary = McBoundary{model},
        .initial_values = payoff,
        .reference = McOracleReference{model},
    };
    return problem;
}

}  // namespace pielm
