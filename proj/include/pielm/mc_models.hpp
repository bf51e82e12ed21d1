#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace pielm {

/// Uncorrelated log-normal dynamics: coordinate i propagates as
/// x^i exp((mu - eps_i^2/2) t + eps_i W_t^i).
struct BlackScholesModel {
    double drift = 0.0;              // mu
    Eigen::VectorXd volatility;      // eps_i per coordinate

    BlackScholesModel() = default;

    BlackScholesModel(double mu, Eigen::VectorXd eps)
        : drift(mu), volatility(std::move(eps)) {
        for (Eigen::Index i = 0; i < volatility.size(); ++i) {
            if (!(volatility(i) > 0.0)) {
                throw std::invalid_argument("volatility " + std::to_string(i) +
                                            " must be positive");
            }
        }
    }

    int dim() const { return static_cast<int>(volatility.size()); }
};

/// Stochastic-volatility dynamics on (stock, variance) coordinate pairs.
/// Coordinates alternate stock, variance, stock, variance, ...; d is even.
struct HestonModel {
    double drift = 0.05;         // alpha
    double vol_of_vol = 0.2;     // beta
    double reversion = 0.6;      // kappa
    double long_run_var = 0.04;  // theta
    double correlation = -0.2;   // rho

    HestonModel() = default;

    HestonModel(double alpha, double beta, double kappa, double theta, double rho)
        : drift(alpha), vol_of_vol(beta), reversion(kappa), long_run_var(theta),
          correlation(rho) {
        if (!(reversion > 0.0) || !(long_run_var > 0.0)) {
            throw std::invalid_argument("heston kappa and theta must be positive");
        }
        // Feller condition keeps the variance process away from zero.
        if (!(2.0 * reversion * long_run_var > vol_of_vol * vol_of_vol)) {
            throw std::invalid_argument("heston parameters violate 2*kappa*theta > beta^2");
        }
        if (std::abs(correlation) > 1.0) {
            throw std::invalid_argument("heston correlation must lie in [-1, 1]");
        }
    }
};

using McModel = std::variant<BlackScholesModel, HestonModel>;

/// One propagated state from (x, t) driven by the standard normals z, one
/// entry per coordinate (W_t^i = sqrt(t) z_i).
inline void propagate_state(const BlackScholesModel& m, const Eigen::VectorXd& x, double t,
                            const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::VectorXd& out) {
    const double sqrt_t = std::sqrt(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double eps = m.volatility(i);
        out(i) = x(i) * std::exp((m.drift - 0.5 * eps * eps) * t + eps * sqrt_t * z(i));
    }
}

/// One propagated state from (x, t); z holds two normals per (stock, variance)
/// pair, stock driver first. The variance update squares a noise-shifted,
/// floored square root and clips at zero; at t = 0 both components reduce to
/// x exactly.
inline void propagate_state(const HestonModel& m, const Eigen::VectorXd& x, double t,
                            const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::VectorXd& out) {
    const double sqrt_t = std::sqrt(t);
    const double beta = m.vol_of_vol;
    const double rho = m.correlation;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index p = 0; p < x.size() / 2; ++p) {
        const double s = x(2 * p);
        const double v = x(2 * p + 1);
        const double w1 = sqrt_t * z(2 * p);
        const double w2 = sqrt_t * z(2 * p + 1);
        out(2 * p) = s * std::exp((m.drift - 0.5 * v) * t + std::sqrt(v) * w1);
        const double floor = 0.5 * beta * sqrt_t;
        const double shifted =
            std::max(floor, std::sqrt(v)) + 0.5 * beta * (rho * w1 + rho_perp * w2);
        const double root = std::max(floor, shifted);
        const double drifted = root * root +
                               (m.reversion * m.long_run_var - 0.25 * beta * beta -
                                m.reversion * v) * t;
        out(2 * p + 1) = std::max(drifted, 0.0);
    }
}

inline void propagate_state(const McModel& m, const Eigen::VectorXd& x, double t,
                            const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::VectorXd& out) {
    std::visit([&](const auto& model) { propagate_state(model, x, t, z, out); }, m);
}

inline int model_dim(const McModel& m) {
    if (const auto* bs = std::get_if<BlackScholesModel>(&m)) return bs->dim();
    return -1;  // heston fits any even dimension
}

}  // namespace pielm
