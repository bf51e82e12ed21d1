#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pielm/experiment.hpp"

// Config files are JSON objects mirroring ExperimentConfig:
//
//   {
//     "problem": "heat", "d": 5, "width": 800, "activation": "tanh",
//     "n_int": 8192, "n_sb": 2048, "n_tb": 6144, "n_s": 0, "n_test": 100000,
//     "weight_low": -0.01, "weight_high": 0.01, "beta1": 1.0, "beta2": 1.0,
//     "backend": "analytic" | "fd", "fd_h1": 1e-6, "fd_h2": 1e-3,
//     "solver": {"method": "svd" | "qr", "rcond": 1e-12},
//     "seeds": {"weights": 1, "collocation": 2, "boundary_mc": 3, "test": 4, "oracle": 5},
//     "oracle": {"n_samples": 16384, "mode": "per_point" | "shared_noise"},
//     "repeats": 1
//   }
//
// Every key is optional; "problem" and "d" pick the defaults the remaining
// keys override. Unknown keys are rejected by name.

namespace pielm {

namespace detail {

template <typename T>
T config_get(const nlohmann::json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config key \"" + key + "\" has the wrong type");
    }
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config must be a JSON object");

    const std::string problem =
        root.contains("problem") ? detail::config_get<std::string>(root["problem"], "problem")
                                 : "heat";
    const int d = root.contains("d") ? detail::config_get<int>(root["d"], "d") : 5;
    ExperimentConfig config = default_config(problem, d);

    std::optional<std::string> backend;
    std::optional<double> fd_h1, fd_h2;
    for (const auto& [key, value] : root.items()) {
        if (key == "problem" || key == "d") {
            continue;  // consumed above
        } else if (key == "width") {
            config.width = detail::config_get<int>(value, key);
        } else if (key == "activation") {
            config.activation = Activation::parse(detail::config_get<std::string>(value, key));
        } else if (key == "n_int") {
            config.n_int = detail::config_get<std::int64_t>(value, key);
        } else if (key == "n_sb") {
            config.n_sb = detail::config_get<std::int64_t>(value, key);
        } else if (key == "n_tb") {
            config.n_tb = detail::config_get<std::int64_t>(value, key);
        } else if (key == "n_s") {
            config.n_s = detail::config_get<std::int64_t>(value, key);
        } else if (key == "n_test") {
            config.n_test = detail::config_get<std::int64_t>(value, key);
        } else if (key == "weight_low") {
            config.weight_low = detail::config_get<double>(value, key);
        } else if (key == "weight_high") {
            config.weight_high = detail::config_get<double>(value, key);
        } else if (key == "beta1") {
            config.beta1 = detail::config_get<double>(value, key);
        } else if (key == "beta2") {
            config.beta2 = detail::config_get<double>(value, key);
        } else if (key == "backend") {
            backend = detail::config_get<std::string>(value, key);
        } else if (key == "fd_h1") {
            fd_h1 = detail::config_get<double>(value, key);
        } else if (key == "fd_h2") {
            fd_h2 = detail::config_get<double>(value, key);
        } else if (key == "solver") {
            if (!value.is_object()) throw std::invalid_argument("config key \"solver\" must be an object");
            for (const auto& [skey, svalue] : value.items()) {
                if (skey == "method") {
                    config.solver.method =
                        parse_solver(detail::config_get<std::string>(svalue, "solver.method"));
                } else if (skey == "rcond") {
                    config.solver.rcond = detail::config_get<double>(svalue, "solver.rcond");
                } else {
                    throw std::invalid_argument("unknown config key \"solver." + skey + "\"");
                }
            }
        } else if (key == "seeds") {
            if (!value.is_object()) throw std::invalid_argument("config key \"seeds\" must be an object");
            for (const auto& [skey, svalue] : value.items()) {
                if (skey == "weights") {
                    config.seeds.weights =
                        detail::config_get<std::uint64_t>(svalue, "seeds.weights");
                } else if (skey == "collocation") {
                    config.seeds.collocation =
                        detail::config_get<std::uint64_t>(svalue, "seeds.collocation");
                } else if (skey == "boundary_mc") {
                    config.seeds.boundary_mc =
                        detail::config_get<std::uint64_t>(svalue, "seeds.boundary_mc");
                } else if (skey == "test") {
                    config.seeds.test = detail::config_get<std::uint64_t>(svalue, "seeds.test");
                } else if (skey == "oracle") {
                    config.seeds.oracle =
                        detail::config_get<std::uint64_t>(svalue, "seeds.oracle");
                } else {
                    throw std::invalid_argument("unknown config key \"seeds." + skey + "\"");
                }
            }
        } else if (key == "oracle") {
            if (!value.is_object()) throw std::invalid_argument("config key \"oracle\" must be an object");
            for (const auto& [skey, svalue] : value.items()) {
                if (skey == "n_samples") {
                    config.oracle.n_samples =
                        detail::config_get<std::int64_t>(svalue, "oracle.n_samples");
                } else if (skey == "mode") {
                    config.oracle.mode =
                        parse_oracle_mode(detail::config_get<std::string>(svalue, "oracle.mode"));
                } else {
                    throw std::invalid_argument("unknown config key \"oracle." + skey + "\"");
                }
            }
        } else if (key == "repeats") {
            config.repeats = detail::config_get<int>(value, key);
        } else {
            throw std::invalid_argument("unknown config key \"" + key + "\"");
        }
    }

    if (backend) {
        if (*backend == "analytic") {
            if (fd_h1 || fd_h2) {
                throw std::invalid_argument(
                    "config keys \"fd_h1\"/\"fd_h2\" require backend \"fd\"");
            }
            config.backend = AnalyticBackend{};
        } else if (*backend == "fd") {
            FiniteDifferenceBackend fd;
            if (fd_h1) fd.h1 = *fd_h1;
            if (fd_h2) fd.h2 = *fd_h2;
            config.backend = fd;
        } else {
            throw std::invalid_argument("config key \"backend\" must be \"analytic\" or \"fd\"");
        }
    } else if (fd_h1 || fd_h2) {
        throw std::invalid_argument("config keys \"fd_h1\"/\"fd_h2\" require backend \"fd\"");
    }

    validate(config);
    return config;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

/// The effective configuration, one key per line, for run logs.
inline std::string describe_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "problem=" << config.problem << '\n'
        << "d=" << config.d << '\n'
        << "width=" << config.width << '\n'
        << "activation=" << config.activation.name() << '\n'
        << "backend=" << backend_name(config.backend);
    if (const auto* fd = std::get_if<FiniteDifferenceBackend>(&config.backend)) {
        out << " (h1=" << csv_number(fd->h1) << ", h2=" << csv_number(fd->h2) << ")";
    }
    out << '\n'
        << "solver=" << solver_name(config.solver.method) << '\n'
        << "rcond=" << csv_number(config.solver.rcond) << '\n'
        << "n_int=" << config.n_int << '\n'
        << "n_sb=" << config.n_sb << '\n'
        << "n_tb=" << config.n_tb << '\n'
        << "n_s=" << config.n_s << '\n'
        << "n_test=" << config.n_test << '\n'
        << "oracle_n_samples=" << config.oracle.n_samples << '\n'
        << "oracle_mode=" << oracle_mode_name(config.oracle.mode) << '\n'
        << "beta1=" << csv_number(config.beta1) << '\n'
        << "beta2=" << csv_number(config.beta2) << '\n'
        << "weight_low=" << csv_number(config.weight_low) << '\n'
        << "weight_high=" << csv_number(config.weight_high) << '\n'
        << "repeats=" << config.repeats << '\n'
        << "seeds=" << config.seeds.weights << '/' << config.seeds.collocation << '/'
        << config.seeds.boundary_mc << '/' << config.seeds.test << '/' << config.seeds.oracle
        << '\n';
    return out.str();
}

}  // namespace pielm
