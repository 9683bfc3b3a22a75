// mixedfso: SNR sweeps of outage probability and ergodic capacity for the
// mixed FSO/RF relay.
//
//   mixedfso outage --preset strong_turbulence --preset rician_shadowed_rf \
//       --xi 6.7 --g 0.5 --omega 0.5 --detection imdd --paths exact,monte_carlo
//   mixedfso sweep --config fig1.cfg --mc-trials 100000 --out fig1.csv
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure in a row.

#include "mixedfso/sweep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace mixedfso::sweep;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

struct Flags {
    std::string config, out, plot;
    std::vector<std::string> presets;
    bool print_config = false;
    // Flag name and the string it binds.
    std::vector<std::pair<std::string, std::string*>> values;
    std::string metric, detection, alpha, beta, g, omega, xi, a0, kappa, mu, m, sweep, fso_snr, rf_snr, grid,
        gamma_th, trunc_q, trunc_l, paths, mc_trials, seed, workers;
};

void add_flags(CLI::App* cmd, Flags& f, bool with_metric) {
    cmd->add_option("--config", f.config, "flat key=value config file; flags override it");
    if (with_metric) cmd->add_option("--metric", f.metric, "capacity | outage");
    cmd->add_option("--preset", f.presets,
                    "strong_turbulence | moderate_turbulence | rician_shadowed_rf | gamma_gamma | nakagami_rf | "
                    "rayleigh_rf | k_distribution (repeatable)");
    const std::pair<const char*, std::string*> opts[] = {
        {"--detection", &f.detection}, {"--alpha", &f.alpha},       {"--beta", &f.beta},
        {"--g", &f.g},                 {"--omega", &f.omega},       {"--xi", &f.xi},
        {"--a0", &f.a0},               {"--kappa", &f.kappa},       {"--mu", &f.mu},
        {"--m", &f.m},                 {"--sweep", &f.sweep},       {"--fso-snr", &f.fso_snr},
        {"--rf-snr", &f.rf_snr},       {"--snr-grid", &f.grid},     {"--gamma-th", &f.gamma_th},
        {"--trunc-q", &f.trunc_q},     {"--trunc-l", &f.trunc_l},   {"--paths", &f.paths},
        {"--mc-trials", &f.mc_trials}, {"--seed", &f.seed},         {"--workers", &f.workers}};
    const char* help[] = {"heterodyne | imdd",
                          "Malaga alpha",
                          "Malaga beta (integer)",
                          "Malaga g",
                          "Malaga Omega",
                          "pointing-error ratio xi",
                          "pointing fraction A0",
                          "RF kappa",
                          "RF mu (integer)",
                          "RF m (integer)",
                          "avg_electrical_snr | rf_avg_snr | both_locked",
                          "FSO SNR (dB) when the RF hop is swept",
                          "RF SNR (dB) when the FSO hop is swept",
                          "start:step:stop or comma list (dB), default 0:5:40",
                          "outage threshold (dB)",
                          "series truncation q",
                          "series truncation l",
                          "comma list of exact, asymptotic, quadrature, monte_carlo",
                          "Monte Carlo trials per row",
                          "Monte Carlo seed",
                          "rows computed in parallel"};
    int i = 0;
    for (const auto& [name, target] : opts) {
        cmd->add_option(name, *target, help[i++]);
        f.values.emplace_back(name, target);
    }
    if (with_metric) f.values.emplace_back("--metric", &f.metric);
    cmd->add_option("--out", f.out, "CSV output path (stdout if absent)");
    cmd->add_option("--plot", f.plot, "write a gnuplot script for the CSV");
    cmd->add_flag("--print-config", f.print_config, "print the effective configuration and exit");
}

int run(CLI::App* cmd, Flags& f, const char* metric) {
    Assignments flags;
    if (metric) flags.emplace_back("metric", metric);
    for (const auto& [name, target] : f.values)
        if (cmd->count(name) > 0) flags.emplace_back(name, *target);
    for (const auto& p : f.presets) flags.emplace_back("preset", p);
    if (cmd->count("--out") > 0) flags.emplace_back("out", f.out);

    SweepSpec spec;
    try {
        spec = f.config.empty() ? parse_config({}, flags) : parse_config_file(f.config, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    if (f.print_config) {
        std::cout << effective_config(spec);
        return 0;
    }

    const auto rows = run_sweep(spec);
    if (spec.out.empty()) {
        std::cout << to_csv(spec, rows);
    } else {
        emit_csv(spec, rows, spec.out);
    }
    if (!f.plot.empty()) {
        std::ofstream(f.plot) << gnuplot_script(spec, spec.out.empty() ? "sweep.csv" : spec.out);
    }

    bool failed = false;
    for (const auto& r : rows) {
        std::fprintf(stderr, "%8.3f dB", r.snr_db);
        for (Path p : spec.paths) std::fprintf(stderr, "  %s %.3fs", to_string(p), r.seconds[static_cast<int>(p)]);
        std::fprintf(stderr, "  %s\n", r.status_text().c_str());
        failed = failed || r.failed;
    }
    return failed ? kNumericFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outage and capacity sweeps for the mixed FSO/RF relay"};
    app.require_subcommand(1);
    Flags cap, out, sw;
    auto* capacity = app.add_subcommand("capacity", "ergodic capacity sweep");
    auto* outage = app.add_subcommand("outage", "outage probability sweep");
    auto* sweep = app.add_subcommand("sweep", "sweep with --metric or a config file");
    add_flags(capacity, cap, false);
    add_flags(outage, out, false);
    add_flags(sweep, sw, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*capacity) return run(capacity, cap, "capacity");
        if (*outage) return run(outage, out, "outage");
        return run(sweep, sw, nullptr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericFailure;
    }
}
