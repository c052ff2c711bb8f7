#pragma once

// Experiment configuration documents (JSON) and the simulate-then-certify
// pipeline.
//
// {
//   "protocol": "memory-test" | "partial-swap" | "custom",
//   "initial_state": "bell" | matrix,
//   "unitary": "cnot_swap" | "swap" | "identity" | {"name": "partial_swap", "alpha": 2.356} | matrix,
//   "settings": ["X", {"label": "-Z", "observable": "-Z"}, {"label": "n", "bloch": [0, 1, 0]}, ...],
//   "repreparations": ["-", "+"],            // a = 0, a = 1; names or matrices
//   "final_measurement": "XZ" | {"bloch": [...]} | {"povm": [matrix, matrix]},
//   "shots": 10000 | "exact",
//   "noise": {"t2": 364, "t1": 1170, "echo_fidelity": 0.995, "echo_interval": 2.5,
//             "initial_gamma": 0.642, "include_t1": false},
//   "wait_ms": 0,
//   "seed": 42,
//   "resamples": 10000
// }
//
// A matrix is an array of real rows or {"re": rows, "im": rows}. Named qubit
// observables are X, Y, Z and XZ = (X + Z)/sqrt 2, optionally prefixed by '-';
// named states are 0, 1, +, -, +i, -i.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tpm/bootstrap.hpp"
#include "tpm/certify.hpp"
#include "tpm/counts.hpp"
#include "tpm/errors.hpp"
#include "tpm/linalg.hpp"
#include "tpm/proclib.hpp"

namespace tpm {

using json = nlohmann::json;

struct ExperimentConfig {
    std::string protocol = "custom";
    ExperimentSetup setup;
    std::optional<std::uint64_t> shots;  // empty means exact probabilities
    std::optional<NoiseParams> noise;
    double wait_ms = 0.0;
    std::uint64_t seed = 42;
    std::size_t resamples = kDefaultResamples;
    double sigma_k = 3.0;
    bool frozen_argmin = false;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string &what) { throw ValidationError("config: " + what); }

inline const json &require_key(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key)) config_error(std::string("missing key '") + key + "'");
    return j.at(key);
}

inline double json_number(const json &j, const std::string &what) {
    if (!j.is_number()) config_error(what + " must be a number");
    return j.get<double>();
}

inline ComplexMatrix json_real_rows(const json &rows, const std::string &what) {
    if (!rows.is_array() || rows.empty()) config_error(what + " must be a non-empty array of rows");
    const std::size_t n = rows.size();
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(m.cols())) {
            config_error(what + " has ragged rows");
        }
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = json_number(rows[i][k], what);
        }
    }
    return m;
}

inline ComplexMatrix json_matrix(const json &j, const std::string &what) {
    if (j.is_array()) return json_real_rows(j, what);
    if (j.is_object() && j.contains("re")) {
        ComplexMatrix m = json_real_rows(j.at("re"), what);
        if (j.contains("im")) {
            const ComplexMatrix im = json_real_rows(j.at("im"), what);
            if (im.rows() != m.rows() || im.cols() != m.cols()) config_error(what + ": re/im shape mismatch");
            m += Complex(0.0, 1.0) * im;
        }
        return m;
    }
    config_error(what + " must be a matrix");
}

inline Bloch named_axis(const std::string &name, const std::string &what) {
    const bool neg = !name.empty() && name.front() == '-';
    const std::string base = neg ? name.substr(1) : name;
    const double h = 1.0 / std::sqrt(2.0);
    Bloch n;
    if (base == "X") {
        n = {1, 0, 0};
    } else if (base == "Y") {
        n = {0, 1, 0};
    } else if (base == "Z") {
        n = {0, 0, 1};
    } else if (base == "XZ") {
        n = {h, 0, h};
    } else {
        config_error(what + ": unknown observable '" + name + "'");
    }
    if (neg) n = {-n[0], -n[1], -n[2]};
    return n;
}

inline Bloch json_bloch(const json &j, const std::string &what) {
    if (!j.is_array() || j.size() != 3) config_error(what + ": bloch must have three components");
    return {json_number(j[0], what), json_number(j[1], what), json_number(j[2], what)};
}

/// A binary measurement from a name, {"observable"}, {"bloch"} or {"povm"}.
inline BinaryPovm json_measurement(const json &j, const std::string &what) {
    if (j.is_string()) return observable_povm(named_axis(j.get<std::string>(), what));
    if (j.is_object()) {
        if (j.contains("observable")) return json_measurement(j.at("observable"), what);
        if (j.contains("bloch")) return observable_povm(json_bloch(j.at("bloch"), what));
        if (j.contains("povm")) {
            const json &p = j.at("povm");
            if (!p.is_array() || p.size() != 2) config_error(what + ": povm must list two effects");
            BinaryPovm povm = {json_matrix(p[0], what), json_matrix(p[1], what)};
            require_binary_povm(povm, what.c_str());
            return povm;
        }
    }
    config_error(what + ": expected an observable name, bloch vector or povm");
}

inline ComplexMatrix named_qubit_state(const std::string &name, const std::string &what) {
    if (name == "0") return qubit::bloch_state({0, 0, 1});
    if (name == "1") return qubit::bloch_state({0, 0, -1});
    if (name == "+") return qubit::bloch_state({1, 0, 0});
    if (name == "-") return qubit::bloch_state({-1, 0, 0});
    if (name == "+i") return qubit::bloch_state({0, 1, 0});
    if (name == "-i") return qubit::bloch_state({0, -1, 0});
    config_error(what + ": unknown state '" + name + "'");
}

inline ComplexMatrix json_qubit_state(const json &j, const std::string &what) {
    ComplexMatrix rho;
    if (j.is_string()) {
        rho = named_qubit_state(j.get<std::string>(), what);
    } else if (j.is_object() && j.contains("bloch")) {
        rho = qubit::bloch_state(json_bloch(j.at("bloch"), what));
    } else {
        rho = json_matrix(j, what);
    }
    if (rho.rows() != 2 || rho.cols() != 2) throw DimensionError(what + ": qubit state expected");
    require_density(rho, what.c_str());
    return rho;
}

inline ComplexMatrix json_unitary(const json &j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "cnot_swap") return memory_test_unitary();
        if (name == "swap") return swap_gate();
        if (name == "identity") return ComplexMatrix::Identity(4, 4);
        config_error("unknown unitary '" + name + "'");
    }
    if (j.is_object() && j.contains("name")) {
        if (j.at("name") != "partial_swap") config_error("unknown unitary '" + j.at("name").dump() + "'");
        const double alpha = json_number(require_key(j, "alpha"), "unitary alpha");
        if (!(alpha >= 0.0 && alpha <= std::numbers::pi)) throw DomainError("config: partial_swap alpha outside [0, pi]");
        return partial_swap(alpha);
    }
    const ComplexMatrix u = json_matrix(j, "unitary");
    if (u.rows() != 4 || u.cols() != 4) throw DimensionError("config: unitary must be 4x4");
    if (!is_unitary(u)) config_error("unitary is not unitary");
    return u;
}

inline NoiseParams json_noise(const json &j) {
    if (!j.is_object()) config_error("noise must be an object");
    NoiseParams p;
    const auto get = [&](const char *key, double &field) {
        if (j.contains(key)) field = json_number(j.at(key), std::string("noise.") + key);
    };
    get("t2", p.t2);
    get("t1", p.t1);
    get("echo_fidelity", p.echo_fidelity);
    get("echo_interval", p.echo_interval);
    get("initial_gamma", p.initial_gamma);
    if (j.contains("include_t1")) {
        if (!j.at("include_t1").is_boolean()) config_error("noise.include_t1 must be a boolean");
        p.include_t1 = j.at("include_t1").get<bool>();
    }
    p.validate();
    return p;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json &j) {
    if (!j.is_object()) detail::config_error("document must be an object");
    ExperimentConfig cfg;
    if (j.contains("protocol")) {
        cfg.protocol = j.at("protocol").get<std::string>();
        if (cfg.protocol != "memory-test" && cfg.protocol != "partial-swap" && cfg.protocol != "custom") {
            detail::config_error("unknown protocol '" + cfg.protocol + "'");
        }
    }

    const json &state = detail::require_key(j, "initial_state");
    if (state.is_string()) {
        if (state.get<std::string>() != "bell") detail::config_error("unknown initial state '" + state.get<std::string>() + "'");
        cfg.setup.initial_state = bell_state();
    } else {
        cfg.setup.initial_state = detail::json_matrix(state, "initial_state");
        if (cfg.setup.initial_state.rows() != 4) throw DimensionError("config: initial_state must be 4x4");
        require_density(cfg.setup.initial_state, "config initial_state");
    }

    cfg.setup.unitary = detail::json_unitary(detail::require_key(j, "unitary"));

    const json &settings = detail::require_key(j, "settings");
    if (!settings.is_array() || settings.empty()) detail::config_error("settings must be a non-empty list");
    for (const auto &s : settings) {
        std::string label;
        if (s.is_string()) {
            label = s.get<std::string>();
        } else if (s.is_object() && s.contains("label")) {
            label = s.at("label").get<std::string>();
        } else {
            detail::config_error("each setting needs a label");
        }
        cfg.setup.instrument.settings.push_back(label);
        cfg.setup.instrument.povm.push_back(detail::json_measurement(s, "setting " + label));
    }

    const json &reps = detail::require_key(j, "repreparations");
    if (!reps.is_array() || reps.size() != 2) detail::config_error("repreparations must list the a = 0 and a = 1 states");
    cfg.setup.instrument.repreparations = {detail::json_qubit_state(reps[0], "repreparation 0"),
                                           detail::json_qubit_state(reps[1], "repreparation 1")};

    cfg.setup.final_measurement = detail::json_measurement(detail::require_key(j, "final_measurement"),
                                                           "final_measurement");
    cfg.setup.instrument.validate();

    if (j.contains("shots")) {
        const json &shots = j.at("shots");
        if (shots.is_string() && shots.get<std::string>() == "exact") {
            cfg.shots.reset();
        } else if (shots.is_number_unsigned() && shots.get<std::uint64_t>() > 0) {
            cfg.shots = shots.get<std::uint64_t>();
        } else {
            detail::config_error("shots must be a positive integer or \"exact\"");
        }
    }
    if (j.contains("noise") && !j.at("noise").is_null()) cfg.noise = detail::json_noise(j.at("noise"));
    if (j.contains("wait_ms")) {
        cfg.wait_ms = detail::json_number(j.at("wait_ms"), "wait_ms");
        if (!(cfg.wait_ms >= 0.0)) throw DomainError("config: wait_ms must be non-negative");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) detail::config_error("seed must be a non-negative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("resamples")) {
        if (!j.at("resamples").is_number_unsigned()) detail::config_error("resamples must be a positive integer");
        cfg.resamples = j.at("resamples").get<std::size_t>();
    }
    return cfg;
}

inline json memory_test_preset() {
    return json::parse(R"({
  "protocol": "memory-test",
  "initial_state": "bell",
  "unitary": "cnot_swap",
  "settings": [
    {"label": "X", "observable": "X"},
    {"label": "Z", "observable": "Z"},
    {"label": "-X", "observable": "-X"},
    {"label": "-Z", "observable": "-Z"}
  ],
  "repreparations": ["-", "+"],
  "final_measurement": "XZ",
  "shots": 10000,
  "seed": 42,
  "resamples": 10000
})");
}

inline json partial_swap_preset() {
    return json::parse(R"({
  "protocol": "partial-swap",
  "initial_state": "bell",
  "unitary": {"name": "partial_swap", "alpha": 2.356194490192345},
  "settings": [
    {"label": "X", "observable": "X"},
    {"label": "Z", "observable": "Z"},
    {"label": "-X", "observable": "-X"},
    {"label": "-Z", "observable": "-Z"}
  ],
  "repreparations": ["+i", "-i"],
  "final_measurement": "X",
  "shots": 10000,
  "seed": 42,
  "resamples": 10000
})");
}

inline json preset_document(const std::string &name) {
    if (name == "memory_test") return memory_test_preset();
    if (name == "partial_swap") return partial_swap_preset();
    throw ValidationError("unknown preset '" + name + "' (expected memory_test or partial_swap)");
}

inline json load_config_document(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParseError(path + ": " + e.what(), 1);
    }
}

struct ExperimentResult {
    Behavior behavior;
    DoTable do_table;
    std::optional<CountTable> counts;
    std::optional<CountTable> do_counts;
    CertReport report;
};

/// Exact or seeded finite-shot statistics of the configured experiment,
/// certified. Noise depolarizes the memory qubit with the decay-model
/// visibility at `wait_ms`. Interventional statistics are reported per setting.
inline ExperimentResult run_experiment(const ExperimentConfig &cfg) {
    const ExperimentSetup &s = cfg.setup;
    ComplexMatrix rho = s.initial_state;
    if (cfg.noise) rho = apply_depolarizing(rho, visibility(*cfg.noise, cfg.wait_ms), 1);
    const ProcessOperator w = build_process(rho, s.unitary);

    ExperimentResult out;
    const Behavior exact = born_rule(w, s.instrument, s.final_measurement);
    const DoTable collapsed = do_probabilities(w, s.instrument.repreparations, s.final_measurement);
    DoTable exact_do;
    exact_do.settings = s.instrument.settings;
    exact_do.probs.assign(exact_do.settings.size(), collapsed.probs.front());

    CertOptions opt;
    opt.sigma_k = cfg.sigma_k;
    opt.seed = cfg.seed;
    if (!cfg.shots) {
        out.behavior = exact;
        out.do_table = exact_do;
    } else {
        std::mt19937_64 rng(splitmix64(cfg.seed));
        out.counts = sample_counts(exact, *cfg.shots, rng);
        out.do_counts = sample_do_counts(exact_do, *cfg.shots, rng);
        out.behavior = counts_to_behavior(*out.counts);
        out.do_table = counts_to_do_table(*out.do_counts);
        BootstrapOptions bo;
        bo.resamples = cfg.resamples;
        bo.seed = cfg.seed;
        bo.frozen_argmin = cfg.frozen_argmin;
        opt.std_errors = bootstrap_errors(*out.counts, &*out.do_counts, bo);
        opt.resamples = cfg.resamples;
    }
    out.report = certify(out.behavior, &out.do_table, opt);
    return out;
}

}  // namespace tpm
