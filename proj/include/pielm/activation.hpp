#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pielm {

/// Hidden-layer nonlinearity with closed-form derivatives up to order two,
/// which is as far as the supported differential operators go.
class Activation {
public:
    enum class Kind { tanh, sigmoid };

    Activation() = default;
    explicit Activation(Kind k) : kind_(k) {}

    static Activation tanh() { return Activation(Kind::tanh); }
    static Activation sigmoid() { return Activation(Kind::sigmoid); }

    static Activation parse(const std::string& name) {
        if (name == "tanh") return tanh();
        if (name == "sigmoid") return sigmoid();
        throw std::invalid_argument("unknown activation \"" + name +
                                    "\" (expected tanh or sigmoid)");
    }

    Kind kind() const { return kind_; }
    const char* name() const { return kind_ == Kind::tanh ? "tanh" : "sigmoid"; }

    double value(double z) const {
        return kind_ == Kind::tanh ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
    }

    // tanh' = 1 - tanh^2, sigmoid' = s(1 - s)
    double deriv1(double z) const {
        const double s = value(z);
        return kind_ == Kind::tanh ? 1.0 - s * s : s * (1.0 - s);
    }

    // tanh'' = -2 tanh (1 - tanh^2), sigmoid'' = s(1 - s)(1 - 2s)
    double deriv2(double z) const {
        const double s = value(z);
        return kind_ == Kind::tanh ? -2.0 * s * (1.0 - s * s)
                                   : s * (1.0 - s) * (1.0 - 2.0 * s);
    }

    double deriv(int order, double z) const {
        switch (order) {
            case 0: return value(z);
            case 1: return deriv1(z);
            case 2: return deriv2(z);
            default:
                throw std::invalid_argument("activation derivative order " +
                                            std::to_string(order) + " not supported");
        }
    }

    /// Elementwise sigma, sigma', sigma'' of Z into any non-null outputs.
    /// All three derive from one evaluation of the base function.
    void eval_levels(const Eigen::MatrixXd& z, Eigen::MatrixXd* s0, Eigen::MatrixXd* s1,
                     Eigen::MatrixXd* s2) const {
        Eigen::ArrayXXd base = kind_ == Kind::tanh ? z.array().tanh().eval()
                                                   : z.array().logistic().eval();
        Eigen::ArrayXXd d1;
        if (s1 || s2) {
            if (kind_ == Kind::tanh) {
                d1 = 1.0 - base.square();
            } else {
                d1 = base * (1.0 - base);
            }
        }
        if (s2) {
            if (kind_ == Kind::tanh) {
                *s2 = (-2.0 * base * d1).matrix();
            } else {
                *s2 = (d1 * (1.0 - 2.0 * base)).matrix();
            }
        }
        if (s1) *s1 = d1.matrix();
        if (s0) *s0 = base.matrix();
    }

private:
    Kind kind_ = Kind::tanh;
};

}  // namespace pielm
