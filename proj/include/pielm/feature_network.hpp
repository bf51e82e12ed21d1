#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "pielm/activation.hpp"
#include "pielm/multi_index.hpp"
#include "pielm/parallel.hpp"
#include "pielm/rng.hpp"

namespace pielm {

struct AnalyticBackend {};

/// Central differences applied coordinate-wise to eval_features: spacing h1
/// for first-order stencils, h2 for pure and mixed second-order stencils
/// (mixed uses the 4-point cross).
struct FiniteDifferenceBackend {
    double h1 = 1e-6;
    double h2 = 1e-3;
};

using DerivativeBackend = std::variant<AnalyticBackend, FiniteDifferenceBackend>;

/// Randomized single-hidden-layer feature map
///
///   phi_i(p) = sigma(a_i . p + b_i),   i = 1..width,
///
/// over network inputs p (normalized spatial coordinates followed by time).
/// The inner weights A and biases b are drawn once and then frozen; the only
/// trainable state is the output weight vector, which is set exactly once
/// after the least-squares fit. The fitted network is u(p) = sum_i w_i phi_i(p);
/// there is no output bias.
class FeatureNetwork {
public:
    FeatureNetwork(Eigen::MatrixXd a, Eigen::VectorXd b, Activation activation)
        : a_(std::move(a)), b_(std::move(b)), activation_(activation) {
        if (a_.rows() < 1) throw std::invalid_argument("feature network width must be >= 1");
        if (a_.cols() < 1) throw std::invalid_argument("feature network input_dim must be >= 1");
        if (b_.size() != a_.rows()) {
            throw std::invalid_argument("bias length " + std::to_string(b_.size()) +
                                        " does not match width " + std::to_string(a_.rows()));
        }
    }

    /// Draws A and then b i.i.d. uniform on [weight_low, weight_high), A
    /// filled row by row, from one sequential stream keyed by the seed. The
    /// draw order is part of the reproducibility contract.
    static FeatureNetwork init_random(Eigen::Index input_dim, Eigen::Index width,
                                      Activation activation, double weight_low,
                                      double weight_high, std::uint64_t seed) {
        if (width < 1) throw std::invalid_argument("feature network width must be >= 1");
        if (input_dim < 1) throw std::invalid_argument("feature network input_dim must be >= 1");
        if (!(weight_low < weight_high)) {
            throw std::invalid_argument("weight range requires weight_low < weight_high");
        }
        rng::Engine eng = rng::substream(seed, rng::Stream::weights);
        Eigen::MatrixXd a(width, input_dim);
        for (Eigen::Index i = 0; i < width; ++i) {
            for (Eigen::Index j = 0; j < input_dim; ++j) {
                a(i, j) = rng::uniform(eng, weight_low, weight_high);
            }
        }
        Eigen::VectorXd b(width);
        for (Eigen::Index i = 0; i < width; ++i) b(i) = rng::uniform(eng, weight_low, weight_high);
        return FeatureNetwork(std::move(a), std::move(b), activation);
    }

    Eigen::Index width() const { return a_.rows(); }
    Eigen::Index input_dim() const { return a_.cols(); }
    const Eigen::MatrixXd& inner_weights() const { return a_; }
    const Eigen::VectorXd& biases() const { return b_; }
    const Activation& activation() const { return activation_; }

    /// Feature matrix Phi with Phi(k, i) = sigma(a_i . p_k + b_i).
    Eigen::MatrixXd eval_features(const Eigen::MatrixXd& points) const {
        check_points(points);
        Eigen::MatrixXd out(points.rows(), width());
        parallel_for(0, points.rows(), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t b = lo; b < hi; b += eval_block) {
                const std::int64_t n = std::min(hi - b, eval_block);
                Eigen::MatrixXd z = lift(points.middleRows(b, n));
                Eigen::MatrixXd s0;
                activation_.eval_levels(z, &s0, nullptr, nullptr);
                out.middleRows(b, n) = s0;
            }
        });
        return out;
    }

    /// Partial derivative d^alpha Phi with respect to the network inputs.
    Eigen::MatrixXd eval_feature_derivative(const Eigen::MatrixXd& points,
                                            const MultiIndex& alpha,
                                            const DerivativeBackend& backend = AnalyticBackend{}) const {
        check_points(points);
        if (alpha.size() != input_dim()) {
            throw std::invalid_argument("multi-index length " + std::to_string(alpha.size()) +
                                        " does not match input_dim " +
                                        std::to_string(input_dim()));
        }
        if (const auto* fd = std::get_if<FiniteDifferenceBackend>(&backend)) {
            return fd_derivative(points, alpha, *fd);
        }
        return analytic_derivative(points, alpha);
    }

    /// Output weights are fixed once by the fit; re-setting is a logic error.
    void set_output_weights(Eigen::VectorXd w) {
        if (has_output_weights_) {
            throw std::logic_error("output weights are already set");
        }
        if (w.size() != width()) {
            throw std::invalid_argument("output weight length " + std::to_string(w.size()) +
                                        " does not match width " + std::to_string(width()));
        }
        w_ = std::move(w);
        has_output_weights_ = true;
    }

    bool has_output_weights() const { return has_output_weights_; }

    const Eigen::VectorXd& output_weights() const {
        if (!has_output_weights_) throw std::logic_error("output weights are not set");
        return w_;
    }

    /// Fitted network values sum_i w_i phi_i(p_k).
    Eigen::VectorXd eval_network(const Eigen::MatrixXd& points) const {
        const Eigen::VectorXd& w = output_weights();
        check_points(points);
        Eigen::VectorXd out(points.rows());
        parallel_for(0, points.rows(), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t b = lo; b < hi; b += eval_block) {
                const std::int64_t n = std::min(hi - b, eval_block);
                Eigen::MatrixXd z = lift(points.middleRows(b, n));
                Eigen::MatrixXd s0;
                activation_.eval_levels(z, &s0, nullptr, nullptr);
                out.segment(b, n).noalias() = s0 * w;
            }
        });
        return out;
    }

private:
    // Caps the rows processed per activation batch so the z / sigma-level
    // temporaries stay bounded at large point counts.
    static constexpr std::int64_t eval_block = 8192;

    void check_points(const Eigen::MatrixXd& points) const {
        if (points.cols() != input_dim()) {
            throw std::invalid_argument("points have " + std::to_string(points.cols()) +
                                        " columns, expected input_dim " +
                                        std::to_string(input_dim()));
        }
    }

    template <typename Block>
    Eigen::MatrixXd lift(const Block& pts) const {
        return ((pts * a_.transpose()).rowwise() + b_.transpose());
    }

    // d^alpha sigma(a_i . p + b_i) = (prod_j a_ij^alpha_j) sigma^(|alpha|)(a_i . p + b_i)
    Eigen::MatrixXd analytic_derivative(const Eigen::MatrixXd& points,
                                        const MultiIndex& alpha) const {
        const int level = alpha.order();
        Eigen::RowVectorXd factor = Eigen::RowVectorXd::Ones(width());
        for (int j = 0; j < alpha.size(); ++j) {
            for (int rep = 0; rep < alpha[j]; ++rep) {
                factor.array() *= a_.col(j).transpose().array();
            }
        }
        Eigen::MatrixXd out(points.rows(), width());
        parallel_for(0, points.rows(), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t b = lo; b < hi; b += eval_block) {
                const std::int64_t n = std::min(hi - b, eval_block);
                Eigen::MatrixXd z = lift(points.middleRows(b, n));
                Eigen::MatrixXd s;
                activation_.eval_levels(z, level == 0 ? &s : nullptr, level == 1 ? &s : nullptr,
                                        level == 2 ? &s : nullptr);
                out.middleRows(b, n) = s.array().rowwise() * factor.array();
            }
        });
        return out;
    }

    Eigen::MatrixXd fd_derivative(const Eigen::MatrixXd& points, const MultiIndex& alpha,
                                  const FiniteDifferenceBackend& fd) const {
        const auto [j, k] = alpha.active_pair();
        switch (alpha.order()) {
            case 0:
                return eval_features(points);
            case 1: {
                Eigen::MatrixXd shifted = points;
                shifted.col(j).array() += fd.h1;
                Eigen::MatrixXd out = eval_features(shifted);
                shifted.col(j) = points.col(j).array() - fd.h1;
                out -= eval_features(shifted);
                return out / (2.0 * fd.h1);
            }
            default: {
                if (j == k) {
                    Eigen::MatrixXd shifted = points;
                    shifted.col(j).array() += fd.h2;
                    Eigen::MatrixXd out = eval_features(shifted);
                    shifted.col(j) = points.col(j).array() - fd.h2;
                    out += eval_features(shifted);
                    out -= 2.0 * eval_features(points);
                    return out / (fd.h2 * fd.h2);
                }
                Eigen::MatrixXd shifted = points;
                shifted.col(j).array() += fd.h2;
                shifted.col(k).array() += fd.h2;
                Eigen::MatrixXd out = eval_features(shifted);
                shifted.col(k) = points.col(k).array() - fd.h2;
                out -= eval_features(shifted);
                shifted.col(j) = points.col(j).array() - fd.h2;
                out += eval_features(shifted);
                shifted.col(k) = points.col(k).array() + fd.h2;
                out -= eval_features(shifted);
                return out / (4.0 * fd.h2 * fd.h2);
            }
        }
    }

    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    Activation activation_;
    Eigen::VectorXd w_;
    bool has_output_weights_ = false;
};

}  // namespace pielm
