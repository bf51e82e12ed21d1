#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace pielm {

/// Axis-aligned spatial box [lower_1, upper_1] x ... x [lower_d, upper_d]
/// paired with the time interval [0, time_horizon].
struct BoxDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double time_horizon = 1.0;

    BoxDomain(Eigen::VectorXd lo, Eigen::VectorXd hi, double horizon)
        : lower(std::move(lo)), upper(std::move(hi)), time_horizon(horizon) {
        if (lower.size() != upper.size()) {
            throw std::invalid_argument("box bounds have mismatched lengths");
        }
        if (lower.size() < 1) throw std::invalid_argument("box dimension must be >= 1");
        for (Eigen::Index j = 0; j < lower.size(); ++j) {
            if (!(lower(j) < upper(j))) {
                throw std::invalid_argument("box side " + std::to_string(j) +
                                            " is empty: lower must be < upper");
            }
        }
        if (!(time_horizon > 0.0)) {
            throw std::invalid_argument("time horizon must be positive");
        }
    }

    static BoxDomain cube(int d, double lo, double hi, double horizon) {
        return BoxDomain(Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi),
                         horizon);
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Eigen::VectorXd& x, double t) const {
        if (x.size() != lower.size()) return false;
        if (t < 0.0 || t > time_horizon) return false;
        return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
    }
};

/// Affine map from physical spatial coordinates to network inputs,
/// x_hat_j = (x_j - shift_j) / scale_j. Time is never rescaled: network
/// inputs are (x_hat, t) with t passed through unchanged.
struct Normalization {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    Normalization(Eigen::VectorXd s, Eigen::VectorXd c)
        : shift(std::move(s)), scale(std::move(c)) {
        if (shift.size() != scale.size()) {
            throw std::invalid_argument("normalization shift/scale lengths differ");
        }
        for (Eigen::Index j = 0; j < scale.size(); ++j) {
            if (!(scale(j) > 0.0)) {
                throw std::invalid_argument("normalization scale " + std::to_string(j) +
                                            " must be positive");
            }
        }
    }

    static Normalization identity(int d) {
        return Normalization(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
    }

    /// Maps the box onto the unit cube: shift = lower, scale = upper - lower.
    static Normalization to_unit(const BoxDomain& box) {
        return Normalization(box.lower, box.upper - box.lower);
    }

    int dim() const { return static_cast<int>(shift.size()); }

    /// (x, t) rows -> (x_hat, t) rows; the trailing time column is untouched.
    Eigen::MatrixXd network_inputs(const Eigen::MatrixXd& points) const {
        if (points.cols() != shift.size() + 1) {
            throw std::invalid_argument("points have " + std::to_string(points.cols()) +
                                        " columns, expected " + std::to_string(shift.size() + 1) +
                                        " (spatial coordinates plus time)");
        }
        Eigen::MatrixXd out = points;
        out.leftCols(shift.size()) =
            (points.leftCols(shift.size()).rowwise() - shift.transpose()).array().rowwise() /
            scale.transpose().array();
        return out;
    }
};

}  // namespace pielm
