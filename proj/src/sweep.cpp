#include "mixedfso/sweep.hpp"

#include "mixedfso/mc_oracle.hpp"
#include "mixedfso/perf_metrics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace mixedfso::sweep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDbMin = -100.0;
constexpr double kDbMax = 200.0;
constexpr double kReductionKappa = 1e-8;
constexpr double kReductionG = 1e-6;

const std::vector<std::string> kKeys = {
    "metric", "preset",  "detection",  "alpha",    "beta",    "g",       "omega",   "xi",
    "a0",     "kappa",   "mu",         "m",        "sweep",   "fso_snr", "rf_snr",  "snr_grid",
    "gamma_th", "trunc_q", "trunc_l", "paths",    "mc_trials", "seed",  "workers", "out"};

const std::vector<std::string> kPresets = {"strong_turbulence", "moderate_turbulence", "rician_shadowed_rf",
                                           "gamma_gamma",       "nakagami_rf",         "rayleigh_rf",
                                           "k_distribution"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string normalize_key(std::string key) {
    key = trim(key);
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "snr_grid_db") key = "snr_grid";
    if (key == "gamma_th_db") key = "gamma_th";
    if (key == "fso_snr_db") key = "fso_snr";
    if (key == "rf_snr_db") key = "rf_snr";
    return key;
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string range_text(double lo, double hi, bool lo_open) {
    return std::string(lo_open ? "(" : "[") + (std::isinf(lo) ? "-inf" : fmt(lo, "%g")) + ", " +
           (std::isinf(hi) ? "inf)" : fmt(hi, "%g") + "]");
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError(key + "=" + text + ": expected a finite number");
    return v;
}

double real_in(const std::string& key, const std::string& text, double lo, double hi, bool lo_open) {
    const double v = parse_double(key, text);
    if ((lo_open ? v <= lo : v < lo) || v > hi)
        throw ConfigError(key + "=" + text + " is out of range; valid range " + range_text(lo, hi, lo_open));
    return v;
}

template <class Int>
Int integer_in(const std::string& key, const std::string& text, Int lo, Int hi) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec == std::errc::invalid_argument || ptr != text.data() + text.size())
        throw ConfigError(key + "=" + text + ": expected an integer");
    if (ec == std::errc::result_out_of_range || v < lo || v > hi)
        throw ConfigError(key + "=" + text + " is out of range; valid range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return v;
}

template <class Enum>
Enum choice(const std::string& key, const std::string& text, const std::vector<std::pair<std::string, Enum>>& opts) {
    std::string names;
    for (const auto& [name, v] : opts) {
        if (name == text) return v;
        names += (names.empty() ? "" : ", ") + name;
    }
    throw ConfigError(key + "=" + text + " is not valid; choose one of {" + names + "}");
}

const std::vector<std::pair<std::string, Metric>> kMetrics = {{"capacity", Metric::capacity},
                                                               {"outage", Metric::outage}};
const std::vector<std::pair<std::string, Detection>> kDetections = {{"heterodyne", Detection::heterodyne},
                                                                     {"imdd", Detection::imdd}};
const std::vector<std::pair<std::string, SweepVariable>> kSweeps = {
    {"avg_electrical_snr", SweepVariable::avg_electrical_snr},
    {"rf_avg_snr", SweepVariable::rf_avg_snr},
    {"both_locked", SweepVariable::both_locked}};
const std::vector<std::pair<std::string, Path>> kPaths = {{"exact", Path::exact},
                                                           {"asymptotic", Path::asymptotic},
                                                           {"quadrature", Path::quadrature},
                                                           {"monte_carlo", Path::monte_carlo}};

std::vector<Path> parse_paths(const std::string& text) {
    std::vector<Path> out;
    for (const auto& item : split(text, ',')) out.push_back(choice("paths", item, kPaths));
    if (out.empty()) throw ConfigError("paths must name at least one of {exact, asymptotic, quadrature, monte_carlo}");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> parse_presets(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& item : split(text, ',')) {
        if (std::find(kPresets.begin(), kPresets.end(), item) == kPresets.end()) {
            std::string names;
            for (const auto& p : kPresets) names += (names.empty() ? "" : ", ") + p;
            throw ConfigError("preset=" + item + " is not valid; choose one of {" + names + "}");
        }
        if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
    }
    return out;
}

bool has(const std::vector<std::string>& v, const char* name) {
    return std::find(v.begin(), v.end(), name) != v.end();
}

void check_preset_conflicts(const std::vector<std::string>& p) {
    const int turbulence = has(p, "strong_turbulence") + has(p, "moderate_turbulence");
    const int rf = has(p, "rician_shadowed_rf") + has(p, "nakagami_rf") + has(p, "rayleigh_rf");
    if (turbulence > 1) throw ConfigError("presets strong_turbulence and moderate_turbulence are mutually exclusive");
    if (rf > 1) throw ConfigError("presets rician_shadowed_rf, nakagami_rf and rayleigh_rf are mutually exclusive");
}

void apply_presets(SweepSpec& s) {
    if (has(s.presets, "strong_turbulence")) {
        s.alpha = 2.29;
        s.beta = 2;
    }
    if (has(s.presets, "moderate_turbulence")) {
        s.alpha = 4.2;
        s.beta = 3;
    }
    if (has(s.presets, "rician_shadowed_rf")) {
        s.kappa = 5.0;
        s.mu = 1;
        s.m = 2;
    }
}

void enforce_reductions(SweepSpec& s) {
    if (has(s.presets, "gamma_gamma")) {
        s.g = kReductionG;
        s.omega = 1.0;
    }
    if (has(s.presets, "k_distribution")) s.beta = 1;
    if (has(s.presets, "nakagami_rf")) {
        s.kappa = kReductionKappa;
        if (s.m)
            s.mu = s.m;
        else if (s.mu)
            s.m = s.mu;
    }
    if (has(s.presets, "rayleigh_rf")) {
        s.kappa = kReductionKappa;
        s.mu = 1;
        s.m = 1;
    }
}

void assign(SweepSpec& s, const std::string& key, const std::string& v) {
    if (key == "metric") s.metric = choice(key, v, kMetrics);
    else if (key == "detection") s.detection = choice(key, v, kDetections);
    else if (key == "alpha") s.alpha = real_in(key, v, 0.0, 1e3, true);
    else if (key == "beta") s.beta = integer_in<int>(key, v, 1, 100);
    else if (key == "g") s.g = real_in(key, v, 0.0, 1e3, true);
    else if (key == "omega") s.omega = real_in(key, v, 0.0, 1e3, true);
    else if (key == "xi") s.xi = real_in(key, v, 0.0, 1e3, true);
    else if (key == "a0") s.a0 = real_in(key, v, 0.0, 1.0, true);
    else if (key == "kappa") s.kappa = real_in(key, v, 0.0, 1e3, true);
    else if (key == "mu") s.mu = integer_in<int>(key, v, 1, 50);
    else if (key == "m") s.m = integer_in<int>(key, v, 1, 100);
    else if (key == "sweep") s.sweep_variable = choice(key, v, kSweeps);
    else if (key == "fso_snr") s.fso_snr_db = real_in(key, v, kDbMin, kDbMax, false);
    else if (key == "rf_snr") s.rf_snr_db = real_in(key, v, kDbMin, kDbMax, false);
    else if (key == "snr_grid") s.grid = parse_grid(v);
    else if (key == "gamma_th") s.gamma_th_db = real_in(key, v, kDbMin, kDbMax, false);
    else if (key == "trunc_q") s.trunc_q = integer_in<int>(key, v, 0, 200);
    else if (key == "trunc_l") s.trunc_l = integer_in<int>(key, v, 0, 200);
    else if (key == "paths") s.paths = parse_paths(v);
    else if (key == "mc_trials") s.mc_trials = integer_in<std::int64_t>(key, v, 1000, 1000000000000LL);
    else if (key == "seed") s.seed = integer_in<std::uint64_t>(key, v, 0, std::numeric_limits<std::uint64_t>::max());
    else if (key == "workers") s.workers = integer_in<int>(key, v, 1, 1024);
    else if (key == "out") s.out = v;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string join_paths(const std::vector<Path>& paths) {
    std::string out;
    for (Path p : paths) out += (out.empty() ? "" : ",") + std::string(to_string(p));
    return out;
}

}  // namespace

const char* to_string(Metric v) { return v == Metric::capacity ? "capacity" : "outage"; }

const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::avg_electrical_snr: return "avg_electrical_snr";
        case SweepVariable::rf_avg_snr: return "rf_avg_snr";
        default: return "both_locked";
    }
}

const char* to_string(Path v) {
    switch (v) {
        case Path::exact: return "exact";
        case Path::asymptotic: return "asymptotic";
        case Path::quadrature: return "quadrature";
        default: return "monte_carlo";
    }
}

static const char* to_string(Detection d) { return d == Detection::imdd ? "imdd" : "heterodyne"; }

bool SweepSpec::wants(Path p) const { return std::find(paths.begin(), paths.end(), p) != paths.end(); }

void SweepSpec::validate() const {
    const std::pair<const char*, bool> required[] = {{"alpha", alpha.has_value()}, {"beta", beta.has_value()},
                                                     {"g", g.has_value()},         {"omega", omega.has_value()},
                                                     {"xi", xi.has_value()},       {"kappa", kappa.has_value()},
                                                     {"mu", mu.has_value()},       {"m", m.has_value()}};
    for (const auto& [key, set] : required)
        if (!set) throw ConfigError(std::string("missing required key '") + key + "'; set it or choose a preset");
    if (grid.empty()) throw ConfigError("snr_grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < kDbMin || grid[i] > kDbMax)
            throw ConfigError("snr_grid value " + fmt(grid[i], "%g") + " is out of range; valid range " +
                              range_text(kDbMin, kDbMax, false));
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ConfigError("snr_grid must be strictly increasing; " + fmt(grid[i], "%g") + " follows " +
                              fmt(grid[i - 1], "%g"));
    }
    if (paths.empty()) throw ConfigError("paths is empty");
    try {
        scenario_at(*this, grid.front()).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
}

Assignments read_assignments(const std::string& text) {
    Assignments out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("snr_grid=" + text + ": expected start:step:stop");
        const double start = parse_double("snr_grid", parts[0]);
        const double step = parse_double("snr_grid", parts[1]);
        const double stop = parse_double("snr_grid", parts[2]);
        if (!(step > 0.0)) throw ConfigError("snr_grid=" + text + ": step must be positive");
        if (stop < start) throw ConfigError("snr_grid=" + text + ": stop is below start");
        const double span = (stop - start) / step;
        const long n = std::lround(std::floor(span + 1e-9)) + 1;
        if (n > 100000) throw ConfigError("snr_grid=" + text + ": more than 100000 points");
        for (long i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        for (const auto& item : split(text, ',')) out.push_back(parse_double("snr_grid", item));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1]))
            throw ConfigError("snr_grid=" + text + " must be strictly increasing; " + fmt(out[i], "%g") + " follows " +
                              fmt(out[i - 1], "%g"));
    if (out.empty()) throw ConfigError("snr_grid is empty");
    return out;
}

SweepSpec parse_config(const Assignments& file_values, const Assignments& flag_values) {
    std::map<std::string, std::string> values;
    std::vector<std::string> presets;
    auto collect = [&](const Assignments& list, bool replace_presets) {
        bool seen_preset = false;
        for (const auto& [raw, value] : list) {
            const std::string key = normalize_key(raw);
            if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
                throw ConfigError("unknown key '" + trim(raw) + "'");
            if (key == "preset") {
                if (replace_presets && !seen_preset) presets.clear();
                seen_preset = true;
                for (const auto& p : parse_presets(value))
                    if (!has(presets, p.c_str())) presets.push_back(p);
            } else {
                values[key] = value;
            }
        }
    };
    collect(file_values, false);
    collect(flag_values, true);

    SweepSpec s;
    check_preset_conflicts(presets);
    s.presets = presets;
    apply_presets(s);
    for (const auto& [key, value] : values) assign(s, key, value);
    enforce_reductions(s);
    s.validate();
    return s;
}

SweepSpec parse_config_text(const std::string& text) { return parse_config(read_assignments(text)); }

SweepSpec parse_config_file(const std::string& path, const Assignments& flag_values) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(read_assignments(buf.str()), flag_values);
}

std::string effective_config(const SweepSpec& s) {
    std::ostringstream o;
    o << "metric=" << to_string(s.metric) << "\n";
    for (const auto& p : s.presets) o << "preset=" << p << "\n";
    o << "detection=" << to_string(s.detection) << "\n";
    if (s.alpha) o << "alpha=" << fmt(*s.alpha) << "\n";
    if (s.beta) o << "beta=" << *s.beta << "\n";
    if (s.g) o << "g=" << fmt(*s.g) << "\n";
    if (s.omega) o << "omega=" << fmt(*s.omega) << "\n";
    if (s.xi) o << "xi=" << fmt(*s.xi) << "\n";
    o << "a0=" << fmt(s.a0) << "\n";
    if (s.kappa) o << "kappa=" << fmt(*s.kappa) << "\n";
    if (s.mu) o << "mu=" << *s.mu << "\n";
    if (s.m) o << "m=" << *s.m << "\n";
    o << "sweep=" << to_string(s.sweep_variable) << "\n";
    o << "fso_snr=" << fmt(s.fso_snr_db) << "\n";
    o << "rf_snr=" << fmt(s.rf_snr_db) << "\n";
    o << "snr_grid=";
    for (std::size_t i = 0; i < s.grid.size(); ++i) o << (i ? "," : "") << fmt(s.grid[i]);
    o << "\n";
    o << "paths=" << join_paths(s.paths) << "\n";
    o << "gamma_th=" << fmt(s.gamma_th_db) << "\n";
    o << "trunc_q=" << s.trunc_q << "\n";
    o << "trunc_l=" << s.trunc_l << "\n";
    o << "mc_trials=" << s.mc_trials << "\n";
    o << "seed=" << s.seed << "\n";
    o << "workers=" << s.workers << "\n";
    if (!s.out.empty()) o << "out=" << s.out << "\n";
    return o.str();
}

Scenario scenario_at(const SweepSpec& s, double snr_db) {
    const double fso_db = s.sweep_variable == SweepVariable::rf_avg_snr ? s.fso_snr_db : snr_db;
    const double rf_db = s.sweep_variable == SweepVariable::avg_electrical_snr ? s.rf_snr_db : snr_db;
    Scenario sc{MalagaFsoLink(s.alpha.value(), s.beta.value(), s.g.value(), s.omega.value(), s.xi.value(), s.a0,
                              s.detection, db_to_linear(fso_db)),
                KappaMuShadowedLink(s.kappa.value(), s.mu.value(), s.m.value(), db_to_linear(rf_db)),
                db_to_linear(s.gamma_th_db), s.trunc_q, s.trunc_l};
    return sc;
}

std::string ResultRow::status_text() const {
    if (status.empty()) return "ok";
    std::string out;
    for (const auto& st : status) out += (out.empty() ? "" : ";") + st;
    return out;
}

ResultRow run_row(const SweepSpec& spec, std::size_t index) {
    ResultRow row;
    row.snr_db = spec.grid.at(index);
    const Scenario sc = scenario_at(spec, row.snr_db);
    const bool capacity = spec.metric == Metric::capacity;

    auto flag = [&](Path p, const std::string& what) { row.status.push_back(std::string(to_string(p)) + ":" + what); };
    auto timed = [&](Path p, auto&& body) {
        if (!spec.wants(p)) return;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const TruncationError&) {
            flag(p, "truncation_failure");
            row.failed = true;
        } catch (const specfun::NonConvergenceError&) {
            flag(p, "nonconvergence");
            row.failed = true;
        } catch (const std::exception&) {
            flag(p, "error");
            row.failed = true;
        }
        row.seconds[static_cast<int>(p)] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    timed(Path::exact, [&] {
        if (capacity) {
            row.exact = ergodic_capacity_exact(sc).value;
        } else {
            const auto r = outage_exact(sc);
            row.exact = r.value;
            row.tail_estimate = r.tail_estimate;
            if (r.truncation_warning) flag(Path::exact, "truncation_warning");
        }
    });
    timed(Path::asymptotic, [&] {
        if (capacity) {
            if (sc.rf.m() < sc.rf.mu()) {
                row.asymptotic = ergodic_capacity_quadrature(sc).value;
                flag(Path::asymptotic, "fallback_quadrature");
            } else {
                row.asymptotic = ergodic_capacity_asymptotic(sc).value;
            }
        } else {
            const auto r = outage_asymptotic(sc);
            row.asymptotic = r.value;
            if (r.method == OutageMethod::numeric_fallback) flag(Path::asymptotic, "fallback_exact");
        }
    });
    timed(Path::quadrature, [&] {
        row.quadrature = capacity ? ergodic_capacity_quadrature(sc).value : outage_quadrature(sc).value;
    });
    timed(Path::monte_carlo, [&] {
        mc::McOptions opt;
        opt.seed = spec.seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
        const auto e = capacity ? mc::estimate_capacity(sc, spec.mc_trials, opt)
                                : mc::estimate_outage(sc, spec.mc_trials, opt);
        row.mc_mean = e.mean;
        row.mc_stderr = e.std_error;
        if (e.unreliable) flag(Path::monte_carlo, "unreliable");
    });
    return row;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows(spec.grid.size());
    const int workers = static_cast<int>(std::min<std::size_t>(spec.workers, rows.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = run_row(spec, i);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return rows;
}

namespace {

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string cell(const std::optional<double>& v) { return v ? fmt(*v, "%.12g") : "NA"; }

}  // namespace

std::string to_csv(const SweepSpec&, const std::vector<ResultRow>& rows) {
    std::string out = std::string(kCsvHeader) + "\r\n";
    for (const auto& r : rows) {
        out += fmt(r.snr_db, "%.12g") + "," + cell(r.exact) + "," + cell(r.asymptotic) + "," + cell(r.quadrature) +
               "," + cell(r.mc_mean) + "," + cell(r.mc_stderr) + "," + cell(r.tail_estimate) + "," +
               csv_field(r.status_text()) + "\r\n";
    }
    return out;
}

void emit_csv(const SweepSpec& spec, const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_csv(spec, rows);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string gnuplot_script(const SweepSpec& spec, const std::string& csv_path) {
    const bool outage = spec.metric == Metric::outage;
    std::ostringstream o;
    o << "set datafile separator ','\n";
    o << "set datafile missing 'NA'\n";
    o << "set key autotitle columnhead\n";
    o << "set xlabel 'SNR (dB)'\n";
    o << "set ylabel '" << (outage ? "outage probability" : "ergodic capacity (bit/s/Hz)") << "'\n";
    if (outage) o << "set logscale y\n";
    o << "plot ";
    bool first = true;
    const std::pair<Path, int> cols[] = {{Path::exact, 2}, {Path::asymptotic, 3}, {Path::quadrature, 4}, {Path::monte_carlo, 5}};
    for (const auto& [p, col] : cols) {
        if (!spec.wants(p)) continue;
        o << (first ? "" : ", \\\n     ") << "'" << csv_path << "' using 1:" << col
          << (p == Path::monte_carlo ? " with points" : " with lines");
        first = false;
    }
    o << "\n";
    return o.str();
}

}  // namespace mixedfso::sweep
