#pragma once

// Configuration-driven SNR sweeps over the exact, asymptotic, quadrature and
// Monte Carlo paths, with CSV output in grid order.

#include "mixedfso/channel_models.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixedfso::sweep {

/// Invalid or unknown configuration; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Metric { capacity, outage };
enum class SweepVariable { avg_electrical_snr, rf_avg_snr, both_locked };
enum class Path { exact = 0, asymptotic = 1, quadrature = 2, monte_carlo = 3 };

struct SweepSpec {
    Metric metric = Metric::outage;
    /// Preset names in the order given.
    std::vector<std::string> presets;

    Detection detection = Detection::heterodyne;
    std::optional<double> alpha;
    std::optional<int> beta;
    std::optional<double> g, omega, xi;
    double a0 = 1.0;
    std::optional<double> kappa;
    std::optional<int> mu, m;

    SweepVariable sweep_variable = SweepVariable::both_locked;
    /// Value of the hop that is not swept (dB).
    double fso_snr_db = 20.0;
    double rf_snr_db = 20.0;
    /// Swept SNR values (dB), strictly increasing.
    std::vector<double> grid{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
    /// Requested paths, sorted and unique.
    std::vector<Path> paths{Path::exact};

    double gamma_th_db = 0.0;
    int trunc_q = 10;
    int trunc_l = 5;
    std::int64_t mc_trials = 1000000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;

    bool wants(Path p) const;
    /// Throws ConfigError on missing or inconsistent values.
    void validate() const;

    bool operator==(const SweepSpec&) const = default;
};

/// Ordered (key, value) assignments.
using Assignments = std::vector<std::pair<std::string, std::string>>;

/// Parses flat key=value text; '#' starts a comment, blank lines are skipped.
Assignments read_assignments(const std::string& text);

/// Builds a validated spec: presets first, then explicit keys in order
/// (later keys win), then the reduction presets are enforced. Keys may use
/// '-' or '_'.
SweepSpec parse_config(const Assignments& file_values, const Assignments& flag_values = {});
SweepSpec parse_config_text(const std::string& text);
SweepSpec parse_config_file(const std::string& path, const Assignments& flag_values = {});

/// key=value text that parses back to the same spec.
std::string effective_config(const SweepSpec& spec);

/// "start:step:stop" or a comma list.
std::vector<double> parse_grid(const std::string& text);

/// Scenario at one swept value (dB); dB-to-linear conversion happens here.
Scenario scenario_at(const SweepSpec& spec, double snr_db);

struct ResultRow {
    double snr_db = 0.0;
    std::optional<double> exact, asymptotic, quadrature;
    std::optional<double> mc_mean, mc_stderr;
    std::optional<double> tail_estimate;
    /// Wall time per path (s), indexed by Path.
    std::array<double, 4> seconds{};
    /// Status flags such as "exact:truncation_warning"; empty means ok.
    std::vector<std::string> status;
    /// At least one requested path failed numerically.
    bool failed = false;

    std::string status_text() const;
};

std::vector<ResultRow> run_sweep(const SweepSpec& spec);
ResultRow run_row(const SweepSpec& spec, std::size_t index);

inline constexpr const char* kCsvHeader = "snr_db,exact,asymptotic,quadrature,mc_mean,mc_stderr,tail_estimate,status";

std::string to_csv(const SweepSpec& spec, const std::vector<ResultRow>& rows);
void emit_csv(const SweepSpec& spec, const std::vector<ResultRow>& rows, const std::string& path);
/// Gnuplot script plotting the requested columns of `csv_path`.
std::string gnuplot_script(const SweepSpec& spec, const std::string& csv_path);

const char* to_string(Metric v);
const char* to_string(SweepVariable v);
const char* to_string(Path v);

}  // namespace mixedfso::sweep
