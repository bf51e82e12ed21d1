#pragma once

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pielm/assembly.hpp"
#include "pielm/metrics.hpp"

namespace pielm {

/// Everything a pipeline run depends on. Defaults reproduce the printed
/// experiment settings for a given (problem, d); see default_config.
struct ExperimentConfig {
    std::string problem = "heat";  // heat | black_scholes | heston
    int d = 5;
    int width = 800;
    Activation activation = Activation::tanh();
    std::int64_t n_int = 8192;
    std::int64_t n_sb = 2048;
    std::int64_t n_tb = 6144;
    std::int64_t n_s = 0;  // MC boundary samples; 0 only for problems without MC data
    std::int64_t n_test = 100000;
    double weight_low = -0.01;
    double weight_high = 0.01;
    double beta1 = 1.0;
    double beta2 = 1.0;
    DerivativeBackend backend = AnalyticBackend{};
    SolveOptions solver;
    SeedBundle seeds;
    OracleSettings oracle;
    int repeats = 1;
};

/// Table-derived defaults. Heat always uses the Table 1/2 settings. For the
/// pricing problems the width and betas follow the printed table row for d,
/// with the nearest printed row's values for dimensions between rows.
inline ExperimentConfig default_config(const std::string& problem, int d) {
    ExperimentConfig config;
    config.problem = problem;
    config.d = d;
    if (problem == "heat") {
        return config;
    }
    if (problem != "black_scholes" && problem != "heston") {
        throw std::invalid_argument("unknown problem \"" + problem +
                                    "\" (expected heat, black_scholes, or heston)");
    }
    config.n_int = 32768;
    config.n_sb = 16384;
    config.n_tb = 16384;
    config.n_s = 16384;
    config.weight_low = -0.1;
    config.weight_high = 0.1;
    if (problem == "black_scholes") {
        config.width = d <= 10 ? 800 : 3200;
        config.beta1 = 5.0;
        config.beta2 = d >= 50 ? 100.0 : 10.0;
    } else {
        if (d == 2) {
            config.width = 800;
            config.beta1 = 800.0;
            config.beta2 = 800.0;
        } else if (d == 4) {
            config.width = 800;
            config.beta1 = 5.0;
            config.beta2 = 50.0;
        } else if (d <= 10) {
            config.width = 800;
            config.beta1 = 5.0;
            config.beta2 = 10.0;
        } else if (d < 50) {
            config.width = 3200;
            config.beta1 = 5.0;
            config.beta2 = 10.0;
        } else {
            config.width = 3200;
            config.beta1 = 10.0;
            config.beta2 = 100.0;
        }
    }
    return config;
}

inline PdeProblem build_problem(const ExperimentConfig& config) {
    if (config.problem == "heat") return make_heat_problem(config.d);
    if (config.problem == "black_scholes") return make_black_scholes_problem(config.d);
    if (config.problem == "heston") return make_heston_problem(config.d);
    throw std::invalid_argument("unknown problem \"" + config.problem +
                                "\" (expected heat, black_scholes, or heston)");
}

/// Field-by-field validation; throws naming the offending field.
inline void validate(const ExperimentConfig& config) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("config field \"" + field + "\": " + why);
    };
    if (config.problem != "heat" && config.problem != "black_scholes" &&
        config.problem != "heston") {
        fail("problem", "expected heat, black_scholes, or heston");
    }
    if (config.d < 1) fail("d", "must be >= 1");
    if (config.problem == "heston" && config.d % 2 != 0) fail("d", "must be even for heston");
    if (config.width < 1) fail("width", "must be >= 1");
    if (config.n_int < 0) fail("n_int", "must be >= 0");
    if (config.n_sb < 0) fail("n_sb", "must be >= 0");
    if (config.n_tb < 0) fail("n_tb", "must be >= 0");
    if (config.n_int + config.n_sb + config.n_tb < 1) {
        fail("n_int", "collocation counts sum to zero");
    }
    const bool mc_problem = config.problem != "heat";
    if (mc_problem && config.n_sb > 0 && config.n_s < 1) {
        fail("n_s", "must be >= 1 for problems with Monte-Carlo boundary data");
    }
    if (config.n_test < 1) fail("n_test", "must be >= 1");
    if (!(config.weight_low < config.weight_high)) {
        fail("weight_low", "must be < weight_high");
    }
    if (!(config.beta1 > 0.0)) fail("beta1", "must be positive");
    if (!(config.beta2 > 0.0)) fail("beta2", "must be positive");
    if (!(config.solver.rcond >= 0.0 && config.solver.rcond < 1.0)) {
        fail("solver.rcond", "must lie in [0, 1)");
    }
    if (const auto* fd = std::get_if<FiniteDifferenceBackend>(&config.backend)) {
        if (!(fd->h1 > 0.0)) fail("fd_h1", "must be positive");
        if (!(fd->h2 > 0.0)) fail("fd_h2", "must be positive");
    }
    if (mc_problem && config.oracle.n_samples < 1) {
        fail("oracle.n_samples", "must be >= 1 for Monte-Carlo references");
    }
    if (config.repeats < 1) fail("repeats", "must be >= 1");
}

struct RunResult {
    ErrorReport error;
    SolveReport solve;
    double wall_seconds = 0.0;
};

/// Full pipeline: sample collocation, build the network, assemble, solve,
/// evaluate. Uses config.seeds as-is; callers running repeats shift seeds
/// with SeedBundle::for_repeat. Optionally dumps the assembled system.
inline RunResult run_experiment(const ExperimentConfig& config,
                                const std::string& dump_path = {}) {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    const PdeProblem problem = build_problem(config);
    FeatureNetwork net =
        FeatureNetwork::init_random(config.d + 1, config.width, config.activation,
                                    config.weight_low, config.weight_high, config.seeds.weights);
    const CollocationSet colloc = sample_collocation(problem.domain, config.n_int, config.n_sb,
                                                     config.n_tb, config.seeds.collocation);
    const McBoundarySpec mc_spec{config.n_s,
                                 std::holds_alternative<McBoundary>(problem.boundary)
                                     ? std::get<McBoundary>(problem.boundary).model
                                     : McModel(HestonModel()),
                                 config.seeds.boundary_mc};
    const LinearSystem system = assemble(problem, net, colloc, config.backend, config.beta1,
                                         config.beta2, &mc_spec);
    if (!dump_path.empty()) dump_system(system, dump_path);
    RunResult result;
    auto [weights, solve_report] = solve_min_norm(system, config.solver);
    result.solve = solve_report;
    net.set_output_weights(std::move(weights));
    result.error = evaluate_error(problem, net, config.n_test, config.seeds, config.oracle);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---- CSV output ----------------------------------------------------------

/// Locale-independent shortest round-trip formatting.
inline std::string csv_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string csv_sanitize(std::string text) {
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return text;
}

inline std::string backend_name(const DerivativeBackend& backend) {
    return std::holds_alternative<AnalyticBackend>(backend) ? "analytic" : "fd";
}

inline std::string run_csv_header() {
    return "problem,d,width,activation,backend,fd_h1,fd_h2,solver,rcond,"
           "n_int,n_sb,n_tb,n_s,n_test,oracle_n_samples,oracle_mode,"
           "beta1,beta2,weight_low,weight_high,repeat,"
           "seed_weights,seed_collocation,seed_boundary_mc,seed_test,seed_oracle,"
           "relative_l2,l2_error,mc_se_rel,solve_rank,wall_time_s,status";
}

/// One run row. On failure pass a nonempty status; metric fields stay empty.
inline std::string run_csv_row(const ExperimentConfig& config, int repeat,
                               const RunResult* result, const std::string& status = "ok") {
    const SeedBundle seeds = config.seeds.for_repeat(repeat);
    std::string fd_h1, fd_h2;
    if (const auto* fd = std::get_if<FiniteDifferenceBackend>(&config.backend)) {
        fd_h1 = csv_number(fd->h1);
        fd_h2 = csv_number(fd->h2);
    }
    std::string row;
    row += config.problem;
    row += ',' + std::to_string(config.d);
    row += ',' + std::to_string(config.width);
    row += ',' + std::string(config.activation.name());
    row += ',' + backend_name(config.backend);
    row += ',' + fd_h1;
    row += ',' + fd_h2;
    row += ',' + std::string(solver_name(config.solver.method));
    row += ',' + csv_number(config.solver.rcond);
    row += ',' + std::to_string(config.n_int);
    row += ',' + std::to_string(config.n_sb);
    row += ',' + std::to_string(config.n_tb);
    row += ',' + std::to_string(config.n_s);
    row += ',' + std::to_string(config.n_test);
    row += ',' + std::to_string(config.oracle.n_samples);
    row += ',' + std::string(oracle_mode_name(config.oracle.mode));
    row += ',' + csv_number(config.beta1);
    row += ',' + csv_number(config.beta2);
    row += ',' + csv_number(config.weight_low);
    row += ',' + csv_number(config.weight_high);
    row += ',' + std::to_string(repeat);
    row += ',' + std::to_string(seeds.weights);
    row += ',' + std::to_string(seeds.collocation);
    row += ',' + std::to_string(seeds.boundary_mc);
    row += ',' + std::to_string(seeds.test);
    row += ',' + std::to_string(seeds.oracle);
    if (result != nullptr) {
        row += ',' + csv_number(result->error.relative_l2);
        row += ',' + csv_number(result->error.l2_error);
        row += ',' + csv_number(result->error.mc_se_rel);
        row += ',' + std::to_string(result->solve.rank);
        row += ',' + csv_number(result->wall_seconds);
    } else {
        row += ",,,,,";
    }
    row += ',' + csv_sanitize(status);
    return row;
}

// ---- Table reproduction --------------------------------------------------

enum class TableId { t1, t2, t3, t4, t5 };
enum class TableScale { full, desk };

inline TableId parse_table_id(std::string name) {
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "t1") return TableId::t1;
    if (name == "t2") return TableId::t2;
    if (name == "t3") return TableId::t3;
    if (name == "t4") return TableId::t4;
    if (name == "t5") return TableId::t5;
    throw std::invalid_argument("unknown table id \"" + name + "\" (expected T1..T5)");
}

inline const char* table_name(TableId id) {
    switch (id) {
        case TableId::t1: return "T1";
        case TableId::t2: return "T2";
        case TableId::t3: return "T3";
        case TableId::t4: return "T4";
        default: return "T5";
    }
}

inline TableScale parse_table_scale(const std::string& name) {
    if (name == "full") return TableScale::full;
    if (name == "desk") return TableScale::desk;
    throw std::invalid_argument("unknown scale \"" + name + "\" (expected full or desk)");
}

/// Row configs of one table at the requested scale. Desk scale keeps rows
/// with d <= 20 and width <= 1600, divides Monte-Carlo sample counts by 4,
/// and switches the error oracle to the shared-noise mode.
inline std::vector<ExperimentConfig> table_configs(TableId id, TableScale scale) {
    std::vector<ExperimentConfig> rows;
    const bool heat = id == TableId::t1 || id == TableId::t2;
    if (heat) {
        for (int d : {5, 10, 20, 50, 100}) {
            for (int width : {800, 1600, 3200}) {
                ExperimentConfig config = default_config("heat", d);
                config.width = width;
                config.activation =
                    id == TableId::t1 ? Activation::tanh() : Activation::sigmoid();
                rows.push_back(config);
            }
        }
    } else {
        struct Row {
            int d;
            int width;
            double beta1;
            double beta2;
        };
        const std::vector<Row> t3 = {{1, 800, 5, 10},    {2, 800, 5, 10},
                                     {10, 800, 5, 10},   {20, 3200, 5, 10},
                                     {50, 3200, 5, 100}, {100, 3200, 5, 100}};
        const std::vector<Row> t5 = {{2, 800, 800, 800}, {4, 800, 5, 50},
                                     {10, 800, 5, 10},   {30, 3200, 5, 10},
                                     {50, 3200, 10, 100}, {100, 3200, 10, 100}};
        const bool heston = id == TableId::t5;
        for (const Row& row : heston ? t5 : t3) {
            ExperimentConfig config =
                default_config(heston ? "heston" : "black_scholes", row.d);
            config.width = row.width;
            config.beta1 = row.beta1;
            config.beta2 = row.beta2;
            config.activation =
                id == TableId::t4 ? Activation::sigmoid() : Activation::tanh();
            rows.push_back(config);
        }
    }
    if (scale == TableScale::desk) {
        std::vector<ExperimentConfig> kept;
        for (ExperimentConfig& config : rows) {
            if (config.d > 20 || config.width > 1600) continue;
            if (config.n_s > 0) config.n_s = std::max<std::int64_t>(1, config.n_s / 4);
            config.oracle.n_samples = std::max<std::int64_t>(1, config.oracle.n_samples / 4);
            config.oracle.mode = OracleMode::shared_noise;
            kept.push_back(std::move(config));
        }
        rows = std::move(kept);
    }
    // Fixed per-row seed constants keep every published row re-runnable.
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].seeds = SeedBundle{}.for_repeat(static_cast<int>(r));
    }
    return rows;
}

inline std::string table_csv_header() {
    return "table,problem,activation,d,n_int,n_sb,n_tb,n_s,width,beta1,beta2,"
           "relative_l2,l2_error,mc_se_rel,time_s,"
           "seed_weights,seed_collocation,seed_boundary_mc,seed_test,seed_oracle,status";
}

/// Runs every row of a table and streams CSV. A row failure is recorded in
/// the status column and the remaining rows still run.
inline void reproduce_table(TableId id, TableScale scale, std::ostream& out,
                            std::ostream* log = nullptr) {
    const std::vector<ExperimentConfig> rows = table_configs(id, scale);
    out << table_csv_header() << '\n';
    for (const ExperimentConfig& config : rows) {
        std::string prefix;
        prefix += table_name(id);
        prefix += ',' + config.problem;
        prefix += ',' + std::string(config.activation.name());
        prefix += ',' + std::to_string(config.d);
        prefix += ',' + std::to_string(config.n_int);
        prefix += ',' + std::to_string(config.n_sb);
        prefix += ',' + std::to_string(config.n_tb);
        prefix += ',' + std::to_string(config.n_s);
        prefix += ',' + std::to_string(config.width);
        prefix += ',' + csv_number(config.beta1);
        prefix += ',' + csv_number(config.beta2);
        std::string seeds;
        seeds += std::to_string(config.seeds.weights);
        seeds += ',' + std::to_string(config.seeds.collocation);
        seeds += ',' + std::to_string(config.seeds.boundary_mc);
        seeds += ',' + std::to_string(config.seeds.test);
        seeds += ',' + std::to_string(config.seeds.oracle);
        if (log != nullptr) {
            *log << "running " << table_name(id) << " " << config.problem << " d=" << config.d
                 << " width=" << config.width << '\n';
        }
        try {
            const RunResult result = run_experiment(config);
            out << prefix << ',' << csv_number(result.error.relative_l2) << ','
                << csv_number(result.error.l2_error) << ','
                << csv_number(result.error.mc_se_rel) << ','
                << csv_number(result.wall_seconds) << ',' << seeds << ",ok\n";
        } catch (const std::exception& e) {
            out << prefix << ",,,,," << seeds << ',' << csv_sanitize(e.what()) << '\n';
        }
        out.flush();
    }
}

// ---- Convergence-rate study ----------------------------------------------

struct RateRow {
    int width = 0;
    double median_relative_l2 = 0.0;
    double iqr_relative_l2 = 0.0;
    std::vector<double> samples;
};

struct RateStudy {
    std::vector<RateRow> rows;
    std::optional<double> slope;  // absent with a single width
};

/// Runs the pipeline repeats times per width (seeds shifted per repeat) and
/// fits the slope of log(median error) against log(width). The slope is a
/// report, not an assertion.
inline RateStudy convergence_study(const ExperimentConfig& base, const std::vector<int>& widths,
                                   int repeats, std::ostream* log = nullptr) {
    if (widths.empty()) throw std::invalid_argument("convergence study needs widths");
    for (std::size_t i = 1; i < widths.size(); ++i) {
        if (widths[i] <= widths[i - 1]) {
            throw std::invalid_argument("widths must be strictly increasing");
        }
    }
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    RateStudy study;
    std::vector<double> xs, medians;
    for (int width : widths) {
        ExperimentConfig config = base;
        config.width = width;
        RateRow row;
        row.width = width;
        for (int r = 0; r < repeats; ++r) {
            config.seeds = base.seeds.for_repeat(r);
            if (log != nullptr) {
                *log << "running width=" << width << " repeat=" << r << '\n';
            }
            row.samples.push_back(run_experiment(config).error.relative_l2);
        }
        row.median_relative_l2 = median(row.samples);
        row.iqr_relative_l2 = interquartile_range(row.samples);
        xs.push_back(static_cast<double>(width));
        medians.push_back(row.median_relative_l2);
        study.rows.push_back(std::move(row));
    }
    study.slope = fit_log_log_slope(xs, medians);
    return study;
}

inline std::string rates_csv_header() {
    return "problem,d,width,repeats,median_relative_l2,iqr_relative_l2,slope";
}

inline void write_rates_csv(const ExperimentConfig& base, const RateStudy& study, int repeats,
                            std::ostream& out) {
    out << rates_csv_header() << '\n';
    for (const RateRow& row : study.rows) {
        out << base.problem << ',' << base.d << ',' << row.width << ',' << repeats << ','
            << csv_number(row.median_relative_l2) << ',' << csv_number(row.iqr_relative_l2)
            << ',';
        if (study.slope) out << csv_number(*study.slope);
        out << '\n';
    }
}

}  // namespace pielm
