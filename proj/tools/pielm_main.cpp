#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pielm/config_io.hpp"
#include "pielm/pielm.hpp"

// Experiment runner. `run` executes one configuration (repeats included),
// `table` reproduces a results table row by row, `rates` sweeps widths and
// reports the error-vs-width slope. CSV goes to --out or stdout; logs and
// the effective config go to stderr.

namespace {

struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> problem;
    std::optional<int> dim;
    std::optional<int> width;
    std::optional<std::string> activation;
    std::optional<std::string> backend;
    std::optional<std::string> solver;
    std::optional<double> rcond;
    std::optional<double> fd_h1, fd_h2;
    std::optional<std::int64_t> n_int, n_sb, n_tb, n_s, n_test, oracle_samples;
    std::optional<std::string> oracle_mode;
    std::optional<double> beta1, beta2, weight_low, weight_high;
    std::optional<int> repeats;
    std::optional<std::uint64_t> seed_weights, seed_collocation, seed_boundary_mc, seed_test,
        seed_oracle;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override its values");
    cmd->add_option("--problem", flags.problem, "heat, black_scholes, or heston");
    cmd->add_option("--dim", flags.dim, "spatial dimension d");
    cmd->add_option("--width", flags.width, "hidden width N");
    cmd->add_option("--activation", flags.activation, "tanh or sigmoid");
    cmd->add_option("--backend", flags.backend, "derivative backend: analytic or fd");
    cmd->add_option("--fd-h1", flags.fd_h1, "finite-difference spacing, first derivatives");
    cmd->add_option("--fd-h2", flags.fd_h2, "finite-difference spacing, second derivatives");
    cmd->add_option("--solver", flags.solver, "least-squares method: svd or qr");
    cmd->add_option("--rcond", flags.rcond, "singular-value cutoff ratio");
    cmd->add_option("--n-int", flags.n_int, "interior collocation points");
    cmd->add_option("--n-sb", flags.n_sb, "spatial-boundary collocation points");
    cmd->add_option("--n-tb", flags.n_tb, "temporal-boundary collocation points");
    cmd->add_option("--n-s", flags.n_s, "Monte-Carlo boundary samples per point");
    cmd->add_option("--n-test", flags.n_test, "test-set size");
    cmd->add_option("--oracle-samples", flags.oracle_samples, "MC reference samples per point");
    cmd->add_option("--oracle-mode", flags.oracle_mode, "per_point or shared_noise");
    cmd->add_option("--beta1", flags.beta1, "spatial-boundary row scaling");
    cmd->add_option("--beta2", flags.beta2, "temporal-boundary row scaling");
    cmd->add_option("--weight-low", flags.weight_low, "hidden-weight range lower end");
    cmd->add_option("--weight-high", flags.weight_high, "hidden-weight range upper end");
    cmd->add_option("--repeats", flags.repeats, "independent repeats with shifted seeds");
    cmd->add_option("--seed-weights", flags.seed_weights, "seed for hidden weights");
    cmd->add_option("--seed-collocation", flags.seed_collocation, "seed for collocation points");
    cmd->add_option("--seed-boundary-mc", flags.seed_boundary_mc, "seed for boundary sampling");
    cmd->add_option("--seed-test", flags.seed_test, "seed for the test set");
    cmd->add_option("--seed-oracle", flags.seed_oracle, "seed for the MC reference");
}

pielm::ExperimentConfig resolve_config(const ConfigFlags& flags) {
    pielm::ExperimentConfig config;
    if (flags.config_path) {
        config = pielm::parse_config_file(*flags.config_path);
        if (flags.problem || flags.dim) {
            // Problem identity changes rebuild the defaults before overrides.
            const std::string problem = flags.problem ? *flags.problem : config.problem;
            const int d = flags.dim ? *flags.dim : config.d;
            if (problem != config.problem) {
                config = pielm::default_config(problem, d);
            } else {
                config.d = d;
            }
        }
    } else {
        config = pielm::default_config(flags.problem.value_or("heat"), flags.dim.value_or(5));
    }
    if (flags.width) config.width = *flags.width;
    if (flags.activation) config.activation = pielm::Activation::parse(*flags.activation);
    if (flags.backend) {
        if (*flags.backend == "analytic") {
            config.backend = pielm::AnalyticBackend{};
        } else if (*flags.backend == "fd") {
            pielm::FiniteDifferenceBackend fd;
            if (const auto* prev = std::get_if<pielm::FiniteDifferenceBackend>(&config.backend)) {
                fd = *prev;
            }
            config.backend = fd;
        } else {
            throw std::invalid_argument("--backend must be analytic or fd");
        }
    }
    if (flags.fd_h1 || flags.fd_h2) {
        auto* fd = std::get_if<pielm::FiniteDifferenceBackend>(&config.backend);
        if (fd == nullptr) {
            throw std::invalid_argument("--fd-h1/--fd-h2 require --backend fd");
        }
        if (flags.fd_h1) fd->h1 = *flags.fd_h1;
        if (flags.fd_h2) fd->h2 = *flags.fd_h2;
    }
    if (flags.solver) config.solver.method = pielm::parse_solver(*flags.solver);
    if (flags.rcond) config.solver.rcond = *flags.rcond;
    if (flags.n_int) config.n_int = *flags.n_int;
    if (flags.n_sb) config.n_sb = *flags.n_sb;
    if (flags.n_tb) config.n_tb = *flags.n_tb;
    if (flags.n_s) config.n_s = *flags.n_s;
    if (flags.n_test) config.n_test = *flags.n_test;
    if (flags.oracle_samples) config.oracle.n_samples = *flags.oracle_samples;
    if (flags.oracle_mode) config.oracle.mode = pielm::parse_oracle_mode(*flags.oracle_mode);
    if (flags.beta1) config.beta1 = *flags.beta1;
    if (flags.beta2) config.beta2 = *flags.beta2;
    if (flags.weight_low) config.weight_low = *flags.weight_low;
    if (flags.weight_high) config.weight_high = *flags.weight_high;
    if (flags.repeats) config.repeats = *flags.repeats;
    if (flags.seed_weights) config.seeds.weights = *flags.seed_weights;
    if (flags.seed_collocation) config.seeds.collocation = *flags.seed_collocation;
    if (flags.seed_boundary_mc) config.seeds.boundary_mc = *flags.seed_boundary_mc;
    if (flags.seed_test) config.seeds.test = *flags.seed_test;
    if (flags.seed_oracle) config.seeds.oracle = *flags.seed_oracle;
    pielm::validate(config);
    return config;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

int cmd_run(const ConfigFlags& flags, const std::string& out_path,
            const std::string& dump_path) {
    const pielm::ExperimentConfig config = resolve_config(flags);
    std::cerr << "effective config:\n" << pielm::describe_config(config);
    std::ofstream file;
    if (!out_path.empty()) file = open_out(out_path);
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << pielm::run_csv_header() << '\n';
    bool failed = false;
    for (int r = 0; r < config.repeats; ++r) {
        pielm::ExperimentConfig run_config = config;
        run_config.seeds = config.seeds.for_repeat(r);
        try {
            const pielm::RunResult result =
                pielm::run_experiment(run_config, r == 0 ? dump_path : std::string());
            out << pielm::run_csv_row(config, r, &result) << '\n';
            std::cerr << "repeat " << r << ": relative_l2="
                      << pielm::csv_number(result.error.relative_l2)
                      << " wall_s=" << pielm::csv_number(result.wall_seconds) << '\n';
        } catch (const std::exception& e) {
            failed = true;
            out << pielm::run_csv_row(config, r, nullptr, e.what()) << '\n';
            std::cerr << "repeat " << r << " failed: " << e.what() << '\n';
        }
        out.flush();
    }
    return failed ? 1 : 0;
}

int cmd_table(const std::string& table, const std::string& scale, const std::string& out_path) {
    const pielm::TableId id = pielm::parse_table_id(table);
    const pielm::TableScale table_scale = pielm::parse_table_scale(scale);
    std::ofstream file;
    if (!out_path.empty()) file = open_out(out_path);
    std::ostream& out = out_path.empty() ? std::cout : file;
    pielm::reproduce_table(id, table_scale, out, &std::cerr);
    return 0;
}

int cmd_rates(const ConfigFlags& flags, std::vector<int> widths, const std::string& out_path) {
    pielm::ExperimentConfig config = resolve_config(flags);
    if (widths.empty()) widths = {800, 1600, 3200};
    std::cerr << "effective config:\n" << pielm::describe_config(config);
    const pielm::RateStudy study =
        pielm::convergence_study(config, widths, config.repeats, &std::cerr);
    std::ofstream file;
    if (!out_path.empty()) file = open_out(out_path);
    std::ostream& out = out_path.empty() ? std::cout : file;
    pielm::write_rates_csv(config, study, config.repeats, out);
    if (study.slope) {
        std::cerr << "log-log slope: " << pielm::csv_number(*study.slope) << '\n';
    } else {
        std::cerr << "log-log slope: undefined (single width)\n";
    }
    return 0;
}

}  // namespace

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

int main(int argc, char** argv) {
    if (openblas_set_num_threads) openblas_set_num_threads(pielm::max_threads());

    CLI::App app{"Physics-informed extreme learning machine experiment runner"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    std::string run_out, dump_path;
    CLI::App* run = app.add_subcommand("run", "run one experiment configuration");
    add_config_flags(run, run_flags);
    run->add_option("--out", run_out, "CSV output path (default: stdout)");
    run->add_option("--dump-system", dump_path,
                    "write the assembled system of the first repeat to a binary file");

    std::string table, table_scale = "desk", table_out;
    CLI::App* table_cmd = app.add_subcommand("table", "reproduce a results table");
    table_cmd->add_option("table", table, "table id: T1..T5")->required();
    table_cmd->add_option("--scale", table_scale, "full or desk (default desk)");
    table_cmd->add_option("--out", table_out, "CSV output path (default: stdout)");

    ConfigFlags rates_flags;
    std::vector<int> widths;
    std::string rates_out;
    CLI::App* rates = app.add_subcommand("rates", "error-vs-width convergence study");
    add_config_flags(rates, rates_flags);
    rates->add_option("--widths", widths, "widths to sweep (default 800 1600 3200)")
        ->delimiter(',');
    rates->add_option("--out", rates_out, "CSV output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags, run_out, dump_path);
        if (table_cmd->parsed()) return cmd_table(table, table_scale, table_out);
        return cmd_rates(rates_flags, widths, rates_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
