// tpmcert: certify temporal quantum memories from counts or simulations.
//
// Exit codes: 0 success, 2 parse or validation error, 3 domain error,
// 1 anything else (I/O).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpm/tpm.hpp"

namespace {

struct GlobalOptions {
    std::uint64_t seed = 42;
    std::uint64_t shots = 0;
    std::size_t resamples = tpm::kDefaultResamples;
    std::string out = ".";
    double sigma_k = 3.0;
    CLI::Option *seed_opt = nullptr;
    CLI::Option *shots_opt = nullptr;
    CLI::Option *resamples_opt = nullptr;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

void write_counts_file(const std::filesystem::path &path, const tpm::CountTable &t) {
    std::ostringstream os;
    tpm::write_counts(os, t);
    tpm::write_text_file(path, os.str());
}

void print_written(const std::vector<std::filesystem::path> &paths) {
    for (const auto &p : paths) std::cerr << "wrote " << p.string() << '\n';
}

int run_certify(const GlobalOptions &g, const std::string &counts_path, const std::string &do_path, bool frozen) {
    const tpm::CountTable obs = tpm::ingest_counts(counts_path);
    const tpm::Behavior b = tpm::counts_to_behavior(obs);
    std::optional<tpm::CountTable> dos;
    std::optional<tpm::DoTable> d;
    if (!do_path.empty()) {
        dos = tpm::ingest_counts(do_path);
        d = tpm::counts_to_do_table(*dos);
    }
    tpm::BootstrapOptions bo;
    bo.resamples = g.resamples;
    bo.seed = g.seed;
    bo.frozen_argmin = frozen;
    tpm::CertOptions opt;
    opt.sigma_k = g.sigma_k;
    opt.seed = g.seed;
    opt.resamples = g.resamples;
    opt.std_errors = tpm::bootstrap_errors(obs, dos ? &*dos : nullptr, bo);
    const tpm::CertReport r = tpm::certify(b, d ? &*d : nullptr, opt);
    print_written(tpm::emit_report(r, {}, g.out));
    std::cout << tpm::report_to_json(r).dump(2) << '\n';
    return 0;
}

tpm::ExperimentConfig load_experiment(const GlobalOptions &g, const std::string &preset, const std::string &config_path,
                                      bool exact, bool frozen) {
    const tpm::json doc = config_path.empty() ? tpm::preset_document(preset) : tpm::load_config_document(config_path);
    tpm::ExperimentConfig cfg = tpm::parse_config(doc);
    if (g.seed_opt->count() > 0) cfg.seed = g.seed;
    if (g.resamples_opt->count() > 0) cfg.resamples = g.resamples;
    if (g.shots_opt->count() > 0) cfg.shots = g.shots;
    if (exact) cfg.shots.reset();
    cfg.sigma_k = g.sigma_k;
    cfg.frozen_argmin = frozen;
    return cfg;
}

int run_simulate(const GlobalOptions &g, const std::string &preset, const std::string &config_path, bool exact,
                 std::optional<double> wait_ms, bool frozen) {
    tpm::ExperimentConfig cfg = load_experiment(g, preset, config_path, exact, frozen);
    if (wait_ms) {
        if (!(*wait_ms >= 0.0)) throw tpm::DomainError("--wait-ms must be non-negative");
        cfg.wait_ms = *wait_ms;
        if (!cfg.noise) cfg.noise = tpm::NoiseParams{};
    }
    const tpm::ExperimentResult res = tpm::run_experiment(cfg);
    auto written = tpm::emit_report(res.report, {}, g.out);
    if (res.counts) {
        const std::filesystem::path dir(g.out);
        write_counts_file(dir / "counts.csv", *res.counts);
        write_counts_file(dir / "do_counts.csv", *res.do_counts);
        written.push_back(dir / "counts.csv");
        written.push_back(dir / "do_counts.csv");
    }
    print_written(written);
    std::cout << tpm::report_to_json(res.report).dump(2) << '\n';
    return 0;
}

int run_decay(const GlobalOptions &g, const tpm::NoiseParams &params, double t_max, std::size_t points) {
    params.validate();
    if (!(t_max >= 0.0)) throw tpm::DomainError("--t-max must be non-negative");
    if (points < 2) throw tpm::ValidationError("--points must be at least 2");
    const auto times = linspace(0.0, t_max, points);
    std::map<std::string, tpm::Curve> curves;
    for (const auto &[t, gamma] : tpm::decay_prediction(params, times)) curves["decay"].push_back({t, gamma, 0.0});
    if (g.shots_opt->count() > 0) {
        tpm::ExperimentConfig cfg = tpm::parse_config(tpm::memory_test_preset());
        cfg.shots = g.shots;
        cfg.resamples = g.resamples;
        cfg.noise = params;
        cfg.sigma_k = g.sigma_k;
        for (std::size_t i = 0; i < times.size(); ++i) {
            cfg.wait_ms = times[i];
            cfg.seed = tpm::splitmix64(g.seed + i);
            const auto rep = tpm::run_experiment(cfg).report;
            curves["decay_simulated"].push_back({times[i], rep.gamma, rep.std_errors->gamma.value_or(0.0)});
        }
    }
    print_written(tpm::emit_report(std::nullopt, curves, g.out));
    nlohmann::ordered_json summary;
    summary["crossing_time_ms"] = tpm::crossing_time(params);
    summary["initial_gamma"] = params.initial_gamma;
    summary["t2_ms"] = params.t2;
    summary["t1_ms"] = params.t1;
    summary["echo_fidelity"] = params.echo_fidelity;
    summary["echo_interval_ms"] = params.echo_interval;
    summary["include_t1"] = params.include_t1;
    tpm::write_text_file(std::filesystem::path(g.out) / "decay_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int run_swap_curve(const GlobalOptions &g, std::size_t points) {
    if (points < 2) throw tpm::ValidationError("--points must be at least 2");
    const auto alphas = linspace(0.0, std::numbers::pi, points);
    std::map<std::string, tpm::Curve> curves;
    if (g.shots_opt->count() == 0) {
        for (const auto &[alpha, gamma] : tpm::partial_swap_gamma_curve(alphas)) {
            curves["swap_curve"].push_back({alpha, gamma, 0.0});
        }
    } else {
        tpm::ExperimentConfig cfg = tpm::parse_config(tpm::partial_swap_preset());
        cfg.shots = g.shots;
        cfg.resamples = g.resamples;
        cfg.sigma_k = g.sigma_k;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            cfg.setup = tpm::partial_swap_setup(alphas[i]);
            cfg.seed = tpm::splitmix64(g.seed + i);
            const auto rep = tpm::run_experiment(cfg).report;
            curves["swap_curve"].push_back({alphas[i], rep.gamma, rep.std_errors->gamma.value_or(0.0)});
        }
    }
    print_written(tpm::emit_report(std::nullopt, curves, g.out));
    return 0;
}

int run_classical_bound(const GlobalOptions &g, std::size_t x) {
    nlohmann::ordered_json j;
    j["settings"] = x;
    j["strategies"] = tpm::strategy_count(x, false);
    j["strategies_crosstalk"] = tpm::strategy_count(x, true);
    j["min_gamma"] = tpm::classical_minimum_gamma(x);
    j["max_pearl_delta"] = tpm::maximum_pearl_delta(x, false);
    j["min_corrected_lhs_crosstalk"] = tpm::corrected_bound_minimum(x, true);
    j["max_pearl_delta_crosstalk"] = tpm::maximum_pearl_delta(x, true);
    tpm::write_text_file(std::filesystem::path(g.out) / "classical_bound.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_jm_scan(const GlobalOptions &g, std::size_t density, std::size_t alphas) {
    if (alphas < 2) throw tpm::ValidationError("--alphas must be at least 2");
    std::map<std::string, tpm::Curve> curves;
    nlohmann::ordered_json witnesses = nlohmann::ordered_json::array();
    for (const auto &pt : tpm::partial_swap_compat_region(linspace(0.0, std::numbers::pi, alphas), density)) {
        curves["jm_scan"].push_back({pt.alpha, pt.min_margin, 0.0});
        witnesses.push_back({{"alpha", pt.alpha},
                             {"min_margin", pt.min_margin},
                             {"jointly_measurable", pt.min_margin >= -tpm::kJointMeasurabilityTol},
                             {"theta_s", pt.witness.theta_s},
                             {"theta_e", pt.witness.theta_e},
                             {"phi_s", pt.witness.phi_s},
                             {"phi_e", pt.witness.phi_e}});
    }
    print_written(tpm::emit_report(std::nullopt, curves, g.out));
    tpm::write_text_file(std::filesystem::path(g.out) / "jm_scan_witnesses.json", witnesses.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Device-independent certification of temporal quantum memories"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    g.seed_opt = app.add_option("--seed", g.seed, "Seed for sampling and bootstrap")->capture_default_str();
    g.shots_opt = app.add_option("--shots", g.shots, "Shots per setting for simulations")->check(CLI::PositiveNumber);
    g.resamples_opt =
        app.add_option("--resamples", g.resamples, "Bootstrap resamples")->check(CLI::Range(2, 100000000))->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--sigma-k", g.sigma_k, "Significance multiplier k of the k-sigma verdicts")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    auto *certify = app.add_subcommand("certify", "Certify observed count tables");
    std::string counts_path, do_path;
    bool frozen = false;
    certify->add_option("--counts", counts_path, "Observational counts CSV (x,a,b,count)")->required();
    certify->add_option("--do", do_path, "Interventional counts CSV (do_a,x,b,count)");
    certify->add_flag("--frozen-argmin", frozen, "Keep the observed argmin in every bootstrap resample");

    auto *simulate = app.add_subcommand("simulate", "Simulate a configured experiment and certify it");
    std::string preset, config_path;
    bool exact = false;
    std::optional<double> wait_ms;
    auto *preset_opt = simulate->add_option("--preset", preset, "memory_test or partial_swap");
    auto *config_opt = simulate->add_option("--config", config_path, "Experiment config JSON");
    preset_opt->excludes(config_opt);
    simulate->add_flag("--exact", exact, "Use exact probabilities instead of sampled counts");
    simulate->add_option("--wait-ms", wait_ms, "Memory wait time in ms under the decay noise model");
    simulate->add_flag("--frozen-argmin", frozen, "Keep the observed argmin in every bootstrap resample");

    auto *decay = app.add_subcommand("decay", "Predicted Gamma versus memory wait time");
    tpm::NoiseParams noise;
    double t_max = 100.0;
    std::size_t decay_points = 101;
    decay->add_option("--t2", noise.t2, "Coherence time T2 in ms")->capture_default_str();
    decay->add_option("--t1", noise.t1, "Relaxation time T1 in ms")->capture_default_str();
    decay->add_option("--echo-fidelity", noise.echo_fidelity, "Fidelity per echo pulse")->capture_default_str();
    decay->add_option("--echo-interval", noise.echo_interval, "Echo interval in ms")->capture_default_str();
    decay->add_option("--initial-gamma", noise.initial_gamma, "Measured zero-wait Gamma")->capture_default_str();
    decay->add_flag("--include-t1", noise.include_t1, "Include the exp(-t/2T1) amplitude factor");
    decay->add_option("--t-max", t_max, "Largest wait time in ms")->capture_default_str();
    decay->add_option("--points", decay_points, "Number of wait times")->capture_default_str();

    auto *swap = app.add_subcommand("swap-curve", "Gamma of the partial-SWAP experiment versus alpha");
    std::size_t swap_points = 64;
    swap->add_option("--points", swap_points, "Number of alpha values in [0, pi]")->capture_default_str();

    auto *classical = app.add_subcommand("classical-bound", "Exact classical bounds by vertex enumeration");
    std::size_t x_size = 4;
    classical->add_option("--x", x_size, "Size of the setting alphabet")->capture_default_str();

    auto *jm = app.add_subcommand("jm-scan", "Joint-measurability margin of the partial-SWAP assemblage");
    std::size_t density = 20, jm_alphas = 9;
    jm->add_option("--density", density, "Grid points per angle")->check(CLI::Range(2, 200))->capture_default_str();
    jm->add_option("--alphas", jm_alphas, "Number of alpha values in [0, pi]")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*certify) return run_certify(g, counts_path, do_path, frozen);
        if (*simulate) {
            if (preset.empty() && config_path.empty()) throw tpm::ValidationError("simulate: --preset or --config is required");
            return run_simulate(g, preset, config_path, exact, wait_ms, frozen);
        }
        if (*decay) return run_decay(g, noise, t_max, decay_points);
        if (*swap) return run_swap_curve(g, swap_points);
        if (*classical) return run_classical_bound(g, x_size);
        if (*jm) return run_jm_scan(g, density, jm_alphas);
    } catch (const tpm::ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const tpm::ResourceError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const tpm::DomainError &e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
