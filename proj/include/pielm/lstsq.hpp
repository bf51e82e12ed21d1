#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <lapacke.h>
#include <stdexcept>
#include <string>
#include <vector>

namespace pielm {

/// svd truncates singular values below rcond * sigma_max and returns the
/// minimum-norm solution; column_pivoted_qr returns a basic solution from a
/// rank-revealing factorization with the same truncation threshold.
enum class SolverMethod { svd, column_pivoted_qr };

inline SolverMethod parse_solver(const std::string& name) {
    if (name == "svd") return SolverMethod::svd;
    if (name == "qr") return SolverMethod::column_pivoted_qr;
    throw std::invalid_argument("unknown solver \"" + name + "\" (expected svd or qr)");
}

inline const char* solver_name(SolverMethod m) {
    return m == SolverMethod::svd ? "svd" : "qr";
}

struct SolveOptions {
    SolverMethod method = SolverMethod::svd;
    double rcond = 1e-12;
};

struct SolveReport {
    Eigen::Index rank = 0;           // effective rank at the given rcond
    double residual_norm = 0.0;      // ||A w - b||_2
    double relative_residual = 0.0;  // residual / ||b||_2 (equals residual when b = 0)
    double wall_seconds = 0.0;
};

/// Least-squares solution of A w ~ b with rank truncation at rcond.
/// The matrix is copied; LAPACK works on the copy.
inline Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                           const SolveOptions& options = {},
                                           SolveReport* report = nullptr) {
    if (a.rows() < 1 || a.cols() < 1) {
        throw std::invalid_argument("least-squares matrix must be nonempty");
    }
    if (a.rows() != b.size()) {
        throw std::invalid_argument("matrix rows " + std::to_string(a.rows()) +
                                    " do not match rhs length " + std::to_string(b.size()));
    }
    if (!(options.rcond >= 0.0 && options.rcond < 1.0)) {
        throw std::invalid_argument("rcond must lie in [0, 1)");
    }
    const auto start = std::chrono::steady_clock::now();
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int ldb = std::max(m, n);
    Eigen::MatrixXd work = a;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ldb);
    rhs.head(m) = b;
    lapack_int rank = 0;
    lapack_int info = 0;
    if (options.method == SolverMethod::svd) {
        Eigen::VectorXd sigma(std::min(m, n));
        info = LAPACKE_dgelsd(LAPACK_COL_MAJOR, m, n, 1, work.data(), m, rhs.data(), ldb,
                              sigma.data(), options.rcond, &rank);
    } else {
        std::vector<lapack_int> jpvt(static_cast<std::size_t>(n), 0);
        info = LAPACKE_dgelsy(LAPACK_COL_MAJOR, m, n, 1, work.data(), m, rhs.data(), ldb,
                              jpvt.data(), options.rcond, &rank);
    }
    if (info < 0) {
        throw std::logic_error("least-squares driver rejected argument " +
                               std::to_string(-info));
    }
    if (info > 0) {
        throw std::runtime_error("least-squares driver failed to converge (info " +
                                 std::to_string(info) + ")");
    }
    Eigen::VectorXd w = rhs.head(n);
    if (report) {
        report->rank = rank;
        report->residual_norm = (a * w - b).norm();
        const double b_norm = b.norm();
        report->relative_residual =
            b_norm > 0.0 ? report->residual_norm / b_norm : report->residual_norm;
        report->wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return w;
}

/// Singular values in descending order (values only, no vectors).
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
    if (a.rows() < 1 || a.cols() < 1) {
        throw std::invalid_argument("singular values of an empty matrix");
    }
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    Eigen::MatrixXd work = a;
    Eigen::VectorXd sigma(std::min(m, n));
    const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m,
                                           sigma.data(), nullptr, 1, nullptr, 1);
    if (info != 0) {
        throw std::runtime_error("singular value computation failed (info " +
                                 std::to_string(info) + ")");
    }
    return sigma;
}

}  // namespace pielm
