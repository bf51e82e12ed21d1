#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "pielm/feature_network.hpp"
#include "pielm/lstsq.hpp"
#include "pielm/pde_problem.hpp"
#include "pielm/sampling.hpp"

namespace pielm {

/// Half-open row ranges of the three blocks, in assembly order
/// interior, spatial boundary, temporal boundary.
struct RowBlocks {
    Eigen::Index interior_begin = 0, interior_end = 0;
    Eigen::Index spatial_begin = 0, spatial_end = 0;
    Eigen::Index temporal_begin = 0, temporal_end = 0;
};

/// The dense collocation system H W = T. Spatial-boundary rows and rhs
/// entries carry the factor beta1, temporal rows beta2, interior rows 1.
struct LinearSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    RowBlocks blocks;
    double beta1 = 1.0;
    double beta2 = 1.0;
};

namespace detail {

inline void check_block_finite(const Eigen::MatrixXd& block, const Eigen::VectorXd& rhs,
                               Eigen::Index row_offset, const char* name) {
    for (Eigen::Index k = 0; k < block.rows(); ++k) {
        if (!block.row(k).allFinite() || !std::isfinite(rhs(k))) {
            throw std::runtime_error(std::string("non-finite value in ") + name +
                                     " block at system row " + std::to_string(row_offset + k));
        }
    }
}

}  // namespace detail

/// Builds the PIELM system: operator rows at interior points, beta1-scaled
/// feature rows with boundary data on the spatial boundary, beta2-scaled
/// feature rows with initial data at t = 0. Monte-Carlo boundary data is
/// drawn once here, per mc_spec, and frozen into the rhs.
inline LinearSystem assemble(const PdeProblem& problem, const FeatureNetwork& net,
                             const CollocationSet& colloc,
                             const DerivativeBackend& backend = AnalyticBackend{},
                             double beta1 = 1.0, double beta2 = 1.0,
                             const McBoundarySpec* mc_spec = nullptr) {
    if (!(beta1 > 0.0) || !std::isfinite(beta1) || !(beta2 > 0.0) || !std::isfinite(beta2)) {
        throw std::invalid_argument("beta1 and beta2 must be positive and finite");
    }
    const int d = problem.dim();
    const Eigen::Index n_int = colloc.interior.rows();
    const Eigen::Index n_sb = colloc.spatial_boundary.rows();
    const Eigen::Index n_tb = colloc.temporal_boundary.rows();
    const Eigen::Index rows = n_int + n_sb + n_tb;
    if (rows < 1) throw std::invalid_argument("collocation set is empty");

    LinearSystem system;
    system.beta1 = beta1;
    system.beta2 = beta2;
    system.blocks = RowBlocks{0, n_int, n_int, n_int + n_sb, n_int + n_sb, rows};
    system.matrix.resize(rows, net.width());
    system.rhs.resize(rows);

    if (n_int > 0) {
        system.matrix.topRows(n_int) = apply_operator(problem, net, colloc.interior, backend);
        for (Eigen::Index k = 0; k < n_int; ++k) {
            system.rhs(k) =
                problem.rhs(colloc.interior.row(k).head(d), colloc.interior(k, d));
        }
        detail::check_block_finite(system.matrix.topRows(n_int), system.rhs.head(n_int), 0,
                                   "interior");
    }

    if (n_sb > 0) {
        system.matrix.middleRows(n_int, n_sb) =
            beta1 *
            net.eval_features(problem.normalization.network_inputs(colloc.spatial_boundary));
        Eigen::VectorXd g(n_sb);
        if (const auto* det = std::get_if<DeterministicBoundary>(&problem.boundary)) {
            for (Eigen::Index k = 0; k < n_sb; ++k) {
                g(k) = det->values(colloc.spatial_boundary.row(k).head(d),
                                   colloc.spatial_boundary(k, d));
            }
        } else {
            const auto& mc = std::get<McBoundary>(problem.boundary);
            if (mc_spec == nullptr || mc_spec->n_samples < 1) {
                throw std::invalid_argument(
                    "problem has Monte-Carlo boundary data but no sample budget was given");
            }
            if (std::holds_alternative<BlackScholesModel>(mc.model)) {
                g = bs_boundary_values(colloc.spatial_boundary,
                                       {mc_spec->n_samples, mc.model, mc_spec->seed},
                                       problem.initial_values);
            } else {
                g = heston_boundary_values(colloc.spatial_boundary,
                                           {mc_spec->n_samples, mc.model, mc_spec->seed},
                                           problem.initial_values);
            }
        }
        system.rhs.segment(n_int, n_sb) = beta1 * g;
        detail::check_block_finite(system.matrix.middleRows(n_int, n_sb),
                                   system.rhs.segment(n_int, n_sb), n_int, "spatial boundary");
    }

    if (n_tb > 0) {
        system.matrix.bottomRows(n_tb) =
            beta2 *
            net.eval_features(problem.normalization.network_inputs(colloc.temporal_boundary));
        for (Eigen::Index k = 0; k < n_tb; ++k) {
            system.rhs(n_int + n_sb + k) =
                beta2 * problem.initial_values(colloc.temporal_boundary.row(k).head(d));
        }
        detail::check_block_finite(system.matrix.bottomRows(n_tb), system.rhs.tail(n_tb),
                                   n_int + n_sb, "temporal boundary");
    }
    return system;
}

/// Writes (H, T) as a flat binary file: two little-endian uint64 headers
/// (rows, cols), then H in row-major 64-bit floats, then the rhs.
inline void dump_system(const LinearSystem& system, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const std::uint64_t rows = static_cast<std::uint64_t>(system.matrix.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(system.matrix.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    Eigen::VectorXd row(system.matrix.cols());
    for (Eigen::Index k = 0; k < system.matrix.rows(); ++k) {
        row = system.matrix.row(k);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(sizeof(double) * row.size()));
    }
    out.write(reinterpret_cast<const char*>(system.rhs.data()),
              static_cast<std::streamsize>(sizeof(double) * system.rhs.size()));
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

struct BlockNorms {
    double min = 0.0;
    double max = 0.0;
};

/// Row-norm ranges per block plus singular-value diagnostics. The rank
/// estimate counts singular values above max(rows, cols) * eps * sigma_max.
struct ConditionReport {
    BlockNorms interior;
    BlockNorms spatial;
    BlockNorms temporal;
    double sigma_max = 0.0;
    double sigma_min = 0.0;  // smallest singular value, possibly 0
    double condition = 0.0;  // sigma_max / sigma_min, inf when singular
    Eigen::Index rank = 0;
};

/// Minimum-norm ELM training step W = H^+ T on the assembled system.
/// (The qr method returns a basic, not minimum-norm, solution on
/// rank-deficient systems; see SolverMethod.)
inline std::pair<Eigen::VectorXd, SolveReport> solve_min_norm(const LinearSystem& system,
                                                              const SolveOptions& options = {}) {
    SolveReport report;
    Eigen::VectorXd w = solve_least_squares(system.matrix, system.rhs, options, &report);
    return {std::move(w), report};
}

struct BlockResiduals {
    Eigen::Index rows = 0;
    double rms = 0.0;
    double max_abs = 0.0;
};

/// Per-block residual statistics with the beta scaling divided back out, so
/// boundary numbers are physical-units residuals.
struct ResidualStats {
    BlockResiduals interior;
    BlockResiduals spatial;
    BlockResiduals temporal;
};

inline ResidualStats residual_stats(const LinearSystem& system, const Eigen::VectorXd& weights) {
    if (weights.size() != system.matrix.cols()) {
        throw std::invalid_argument("weight length " + std::to_string(weights.size()) +
                                    " does not match system columns " +
                                    std::to_string(system.matrix.cols()));
    }
    const Eigen::VectorXd residual = system.matrix * weights - system.rhs;
    auto block = [&](Eigen::Index begin, Eigen::Index end, double beta) {
        BlockResiduals stats;
        stats.rows = end - begin;
        if (stats.rows == 0) return stats;
        const Eigen::VectorXd r = residual.segment(begin, stats.rows) / beta;
        stats.rms = std::sqrt(r.squaredNorm() / static_cast<double>(stats.rows));
        stats.max_abs = r.cwiseAbs().maxCoeff();
        return stats;
    };
    ResidualStats stats;
    stats.interior = block(system.blocks.interior_begin, system.blocks.interior_end, 1.0);
    stats.spatial = block(system.blocks.spatial_begin, system.blocks.spatial_end, system.beta1);
    stats.temporal = block(system.blocks.temporal_begin, system.blocks.temporal_end, system.beta2);
    return stats;
}

inline ConditionReport condition_report(const LinearSystem& system) {
    auto block_norms = [&](Eigen::Index begin, Eigen::Index end) {
        BlockNorms norms;
        if (end <= begin) return norms;
        norms.min = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = begin; k < end; ++k) {
            const double nrm = system.matrix.row(k).norm();
            norms.min = std::min(norms.min, nrm);
            norms.max = std::max(norms.max, nrm);
        }
        return norms;
    };
    ConditionReport report;
    report.interior = block_norms(system.blocks.interior_begin, system.blocks.interior_end);
    report.spatial = block_norms(system.blocks.spatial_begin, system.blocks.spatial_end);
    report.temporal = block_norms(system.blocks.temporal_begin, system.blocks.temporal_end);
    const Eigen::VectorXd sigma = singular_values(system.matrix);
    report.sigma_max = sigma(0);
    report.sigma_min = sigma(sigma.size() - 1);
    report.condition = report.sigma_min > 0.0
                           ? report.sigma_max / report.sigma_min
                           : std::numeric_limits<double>::infinity();
    const double tol = static_cast<double>(std::max(system.matrix.rows(), system.matrix.cols())) *
                       std::numeric_limits<double>::epsilon() * report.sigma_max;
    report.rank = (sigma.array() > tol).count();
    return report;
}

}  // namespace pielm
