#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pielm/domain.hpp"
#include "pielm/mc_models.hpp"
#include "pielm/parallel.hpp"
#include "pielm/rng.hpp"

// Collocation, test-point and Monte-Carlo sampling. Every point owns a
// substream keyed by its index, so a sampled set is a pure function of
// (domain, counts, seed): chunking, thread count and the fate of other
// points cannot change it.

namespace pielm {

/// Collocation points as (x, t) rows: interior of the space-time cylinder,
/// spatial boundary with t in (0, T), and the t = 0 slice.
struct CollocationSet {
    Eigen::MatrixXd interior;
    Eigen::MatrixXd spatial_boundary;
    Eigen::MatrixXd temporal_boundary;
};

namespace detail {

inline void check_count(std::int64_t n, const char* what) {
    if (n < 0) throw std::invalid_argument(std::string(what) + " count must be >= 0");
}

/// Uniform interior draws; per point: spatial coordinates in order, then time.
inline Eigen::MatrixXd sample_cylinder(const BoxDomain& box, std::int64_t n,
                                       std::uint64_t seed, rng::Stream stream,
                                       bool time_at_zero) {
    const int d = box.dim();
    Eigen::MatrixXd out(n, d + 1);
    parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            rng::Engine eng = rng::substream(seed, stream, static_cast<std::uint64_t>(p));
            for (int j = 0; j < d; ++j) {
                out(p, j) = rng::uniform(eng, box.lower(j), box.upper(j));
            }
            out(p, d) = time_at_zero ? 0.0 : rng::uniform(eng, 0.0, box.time_horizon);
        }
    });
    return out;
}

}  // namespace detail

/// Points on the spatial boundary (one coordinate pinned to a face), with
/// faces weighted by their (d-1)-volume so unequal box sides stay uniform in
/// surface measure. Per point: face draw, free coordinates in order, time.
inline Eigen::MatrixXd sample_spatial_boundary(const BoxDomain& box, std::int64_t n,
                                               std::uint64_t seed) {
    detail::check_count(n, "spatial boundary");
    const int d = box.dim();
    // Face 2j holds coordinate j at lower(j), face 2j+1 at upper(j); both
    // share the volume of the box with side j removed.
    std::vector<double> cumulative(static_cast<std::size_t>(2 * d));
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
        double vol = 1.0;
        for (int k = 0; k < d; ++k) {
            if (k != j) vol *= box.upper(k) - box.lower(k);
        }
        total += vol;
        cumulative[static_cast<std::size_t>(2 * j)] = total;
        total += vol;
        cumulative[static_cast<std::size_t>(2 * j + 1)] = total;
    }
    Eigen::MatrixXd out(n, d + 1);
    parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            rng::Engine eng =
                rng::substream(seed, rng::Stream::spatial_boundary, static_cast<std::uint64_t>(p));
            const double target = rng::uniform_open01(eng) * total;
            int face = 2 * d - 1;
            for (std::size_t f = 0; f < cumulative.size(); ++f) {
                if (target < cumulative[f]) {
                    face = static_cast<int>(f);
                    break;
                }
            }
            const int pinned = face / 2;
            for (int j = 0; j < d; ++j) {
                if (j == pinned) {
                    out(p, j) = face % 2 == 0 ? box.lower(j) : box.upper(j);
                } else {
                    out(p, j) = rng::uniform(eng, box.lower(j), box.upper(j));
                }
            }
            out(p, d) = rng::uniform(eng, 0.0, box.time_horizon);
        }
    });
    return out;
}

inline CollocationSet sample_collocation(const BoxDomain& box, std::int64_t n_interior,
                                         std::int64_t n_spatial, std::int64_t n_temporal,
                                         std::uint64_t seed) {
    detail::check_count(n_interior, "interior");
    detail::check_count(n_temporal, "temporal boundary");
    CollocationSet set;
    set.interior = detail::sample_cylinder(box, n_interior, seed, rng::Stream::interior, false);
    set.spatial_boundary = sample_spatial_boundary(box, n_spatial, seed);
    set.temporal_boundary =
        detail::sample_cylinder(box, n_temporal, seed, rng::Stream::temporal_boundary, true);
    return set;
}

/// Uniform evaluation points over the space-time cylinder.
inline Eigen::MatrixXd sample_test_set(const BoxDomain& box, std::int64_t n,
                                       std::uint64_t seed) {
    detail::check_count(n, "test set");
    return detail::sample_cylinder(box, n, seed, rng::Stream::test_points, false);
}

using Payoff = std::function<double(const Eigen::VectorXd&)>;

/// Per-point Monte-Carlo statistics of payoff(propagated state).
struct McStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd standard_error;  // zero when n_samples == 1
};

/// Sample means of payoff over n_samples propagated states per (x, t) row.
/// Point p draws from substream (seed, stream, p); within a point, sample n
/// consumes the normals for sample n before sample n+1.
inline McStats mc_sample_means(const Eigen::MatrixXd& points, const McModel& model,
                               const Payoff& payoff, std::int64_t n_samples,
                               std::uint64_t seed, rng::Stream stream) {
    if (n_samples < 1) throw std::invalid_argument("mc sample count must be >= 1");
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols() - 1;
    if (d < 1) throw std::invalid_argument("mc points need spatial coordinates plus time");
    const int md = model_dim(model);
    if (md >= 0 && md != d) {
        throw std::invalid_argument("model dimension " + std::to_string(md) +
                                    " does not match points dimension " + std::to_string(d));
    }
    McStats stats;
    stats.mean.resize(n);
    stats.standard_error.resize(n);
    parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
        Eigen::VectorXd z(d);
        Eigen::VectorXd state(d);
        for (std::int64_t p = lo; p < hi; ++p) {
            rng::Engine eng = rng::substream(seed, stream, static_cast<std::uint64_t>(p));
            rng::NormalGen normal(eng);
            const Eigen::VectorXd x = points.row(p).head(d);
            const double t = points(p, d);
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::int64_t s = 0; s < n_samples; ++s) {
                for (Eigen::Index j = 0; j < d; ++j) z(j) = normal();
                propagate_state(model, x, t, z, state);
                const double value = payoff(state);
                sum += value;
                sum_sq += value * value;
            }
            const double mean = sum / static_cast<double>(n_samples);
            stats.mean(p) = mean;
            if (n_samples > 1) {
                const double var =
                    std::max(0.0, (sum_sq - static_cast<double>(n_samples) * mean * mean) /
                                      static_cast<double>(n_samples - 1));
                stats.standard_error(p) = std::sqrt(var / static_cast<double>(n_samples));
            } else {
                stats.standard_error(p) = 0.0;
            }
        }
    });
    return stats;
}

/// Monte-Carlo boundary data request: sample budget, dynamics, seed.
struct McBoundarySpec {
    std::int64_t n_samples = 0;
    McModel model;
    std::uint64_t seed = 0;
};

namespace detail {
inline void check_times_nonnegative(const Eigen::MatrixXd& points) {
    const Eigen::Index tcol = points.cols() - 1;
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        if (points(p, tcol) < 0.0) {
            throw std::invalid_argument("point " + std::to_string(p) + " has negative time");
        }
    }
}
}  // namespace detail

/// Approximate Dirichlet data for the Black-Scholes problem: the sample mean
/// of payoff over log-normally propagated states, Eq-style
/// (1/N_s) sum_n psi([x^i exp((mu - eps_i^2/2) t + eps_i sqrt(t) Z_i^n)]).
inline Eigen::VectorXd bs_boundary_values(const Eigen::MatrixXd& points,
                                          const McBoundarySpec& spec, const Payoff& payoff) {
    if (!std::holds_alternative<BlackScholesModel>(spec.model)) {
        throw std::invalid_argument("bs_boundary_values requires a Black-Scholes model");
    }
    detail::check_times_nonnegative(points);
    return mc_sample_means(points, spec.model, payoff, spec.n_samples, spec.seed,
                           rng::Stream::boundary_mc)
        .mean;
}

/// Approximate Dirichlet data for the Heston problem: the sample mean of
/// payoff over (stock, variance) states propagated by the nested-max update.
inline Eigen::VectorXd heston_boundary_values(const Eigen::MatrixXd& points,
                                              const McBoundarySpec& spec, const Payoff& payoff) {
    if (!std::holds_alternative<HestonModel>(spec.model)) {
        throw std::invalid_argument("heston_boundary_values requires a Heston model");
    }
    if ((points.cols() - 1) % 2 != 0) {
        throw std::invalid_argument("heston boundary points need an even spatial dimension");
    }
    detail::check_times_nonnegative(points);
    return mc_sample_means(points, spec.model, payoff, spec.n_samples, spec.seed,
                           rng::Stream::boundary_mc)
        .mean;
}

/// Same statistic evaluated against one shared bank of normal draws, so all
/// points see identical noise. The bank is drawn column by column (sample n
/// fills coordinates in order) from substream (seed, stream, 0).
inline McStats mc_sample_means_shared(const Eigen::MatrixXd& points, const McModel& model,
                                      const Payoff& payoff, std::int64_t n_samples,
                                      std::uint64_t seed, rng::Stream stream) {
    if (n_samples < 1) throw std::invalid_argument("mc sample count must be >= 1");
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols() - 1;
    rng::Engine eng = rng::substream(seed, stream, 0);
    rng::NormalGen normal(eng);
    Eigen::MatrixXd bank(d, n_samples);
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        for (Eigen::Index j = 0; j < d; ++j) bank(j, s) = normal();
    }
    McStats stats;
    stats.mean.resize(n);
    stats.standard_error.resize(n);
    parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
        Eigen::VectorXd state(d);
        for (std::int64_t p = lo; p < hi; ++p) {
            const Eigen::VectorXd x = points.row(p).head(d);
            const double t = points(p, d);
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::int64_t s = 0; s < n_samples; ++s) {
                propagate_state(model, x, t, bank.col(s), state);
                const double value = payoff(state);
                sum += value;
                sum_sq += value * value;
            }
            const double mean = sum / static_cast<double>(n_samples);
            stats.mean(p) = mean;
            if (n_samples > 1) {
                const double var =
                    std::max(0.0, (sum_sq - static_cast<double>(n_samples) * mean * mean) /
                                      static_cast<double>(n_samples - 1));
                stats.standard_error(p) = std::sqrt(var / static_cast<double>(n_samples));
            } else {
                stats.standard_error(p) = 0.0;
            }
        }
    });
    return stats;
}

}  // namespace pielm
