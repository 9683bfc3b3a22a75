#include "mixedfso/sweep.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace mixedfso;
using namespace mixedfso::sweep;

namespace {

const char* kBase =
    "metric=outage\n"
    "preset=strong_turbulence\n"
    "preset=rician_shadowed_rf\n"
    "xi=6.7\n"
    "g=0.5\n"
    "omega=0.5\n";

std::string error_of(const std::string& text, const Assignments& flags = {}) {
    try {
        parse_config(read_assignments(text), flags);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

int cli(const std::string& args) {
    const int rc = std::system((std::string(MIXEDFSO_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("minimal config is fully defaulted") {
    const SweepSpec s = parse_config_text(kBase);
    CHECK(s.metric == Metric::outage);
    CHECK(s.trunc_q == 10);
    CHECK(s.trunc_l == 5);
    CHECK(*s.alpha == 2.29);
    CHECK(*s.beta == 2);
    CHECK(*s.kappa == 5.0);
    CHECK(*s.mu == 1);
    CHECK(*s.m == 2);
    CHECK(s.grid == std::vector<double>{0, 5, 10, 15, 20, 25, 30, 35, 40});
    CHECK(s.paths == std::vector<Path>{Path::exact});
    CHECK(s.mc_trials == 1000000);
    CHECK(s.sweep_variable == SweepVariable::both_locked);
    CHECK(s.detection == Detection::heterodyne);

    const Scenario sc = scenario_at(s, 20.0);
    CHECK(sc.fso.avg_snr() == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(sc.rf.avg_snr() == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(sc.gamma_th == 1.0);
    CHECK(sc.q_max == 10);
    CHECK(sc.l_max == 5);
}

TEST_CASE("sweep variable selects the swept hop") {
    SweepSpec s = parse_config_text(std::string(kBase) + "sweep=rf_avg_snr\nfso_snr=30\n");
    Scenario sc = scenario_at(s, 10.0);
    CHECK(sc.fso.avg_snr() == doctest::Approx(1000.0).epsilon(1e-15));
    CHECK(sc.rf.avg_snr() == doctest::Approx(10.0).epsilon(1e-15));
    s = parse_config_text(std::string(kBase) + "sweep=avg_electrical_snr\nrf_snr=15\n");
    sc = scenario_at(s, 10.0);
    CHECK(sc.fso.avg_snr() == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(sc.rf.avg_snr() == doctest::Approx(std::pow(10.0, 1.5)).epsilon(1e-15));
}

TEST_CASE("flags override file values and show in the effective config") {
    const SweepSpec s = parse_config(read_assignments(std::string(kBase) + "mc_trials=5000\n"),
                                     {{"--mc-trials", "20000"}, {"--alpha", "3.5"}});
    CHECK(s.mc_trials == 20000);
    CHECK(*s.alpha == 3.5);
    const std::string echo = effective_config(s);
    CHECK(contains(echo, "mc_trials=20000\n"));
    CHECK(contains(echo, "alpha=3.5\n"));

    const SweepSpec p = parse_config(read_assignments(kBase), {{"preset", "moderate_turbulence"},
                                                               {"preset", "rician_shadowed_rf"}});
    CHECK(*p.alpha == 4.2);
    CHECK(*p.beta == 3);
}

TEST_CASE("effective config round-trips") {
    const std::string cases[] = {
        kBase,
        std::string(kBase) + "snr_grid=-3.3:0.7:4.1\npaths=monte_carlo,exact,quadrature\nseed=18446744073709551615\n"
                             "gamma_th=4.77\ndetection=imdd\nout=run.csv\nworkers=3\n",
        "metric=capacity\npreset=gamma_gamma\npreset=nakagami_rf\nalpha=4.2\nbeta=3\nxi=1.1\nm=3\na0=0.8\n",
        "metric=outage\npreset=rayleigh_rf\npreset=k_distribution\nalpha=2.29\ng=0.3\nomega=0.7\nxi=0.9\n"
        "snr_grid=0.1,0.2,0.30000000000000004\n",
    };
    for (const auto& text : cases) {
        const SweepSpec a = parse_config_text(text);
        const SweepSpec b = parse_config_text(effective_config(a));
        CHECK(a == b);
        CHECK(effective_config(a) == effective_config(b));
    }
}

TEST_CASE("reduction presets are enforced after explicit keys") {
    SweepSpec s = parse_config_text(std::string(kBase) + "preset=gamma_gamma\ng=3\n");
    CHECK(*s.g == 1e-6);
    CHECK(*s.omega == 1.0);
    s = parse_config_text("preset=strong_turbulence\npreset=nakagami_rf\nxi=2\ng=0.5\nomega=0.5\nmu=4\nm=2\n");
    CHECK(*s.kappa == 1e-8);
    CHECK(*s.mu == 2);
    s = parse_config_text("preset=moderate_turbulence\npreset=rayleigh_rf\npreset=k_distribution\nxi=2\ng=0.5\nomega=0.5\n");
    CHECK(*s.beta == 1);
    CHECK(*s.mu == 1);
    CHECK(*s.m == 1);
}

TEST_CASE("configuration errors are named") {
    CHECK(contains(error_of(std::string(kBase) + "snr_grid=10,5,20\n"), "strictly increasing"));
    CHECK(contains(error_of(std::string(kBase) + "snr_grid=10:-5:20\n"), "step must be positive"));
    CHECK(contains(error_of(std::string(kBase) + "snr_grid=\n"), "snr_grid"));
    CHECK(contains(error_of(std::string(kBase) + "turbulence=3\n"), "unknown key 'turbulence'"));
    CHECK(contains(error_of(kBase, {{"--bogus", "1"}}), "unknown key '--bogus'"));
    CHECK(contains(error_of(std::string(kBase) + "a0=1.5\n"), "valid range (0, 1]"));
    CHECK(contains(error_of(std::string(kBase) + "mc_trials=10\n"), "valid range [1000, 1000000000000]"));
    CHECK(contains(error_of(std::string(kBase) + "mu=0\n"), "valid range [1, 50]"));
    CHECK(contains(error_of(std::string(kBase) + "alpha=abc\n"), "expected a finite number"));
    CHECK(contains(error_of(std::string(kBase) + "paths=exact,fast\n"), "choose one of"));
    CHECK(contains(error_of(std::string(kBase) + "preset=strong\n"), "preset=strong is not valid"));
    CHECK(contains(error_of(std::string(kBase) + "preset=moderate_turbulence\n"), "mutually exclusive"));
    CHECK(contains(error_of("preset=strong_turbulence\npreset=rician_shadowed_rf\ng=0.5\nomega=0.5\n"),
                   "missing required key 'xi'"));
    CHECK(contains(error_of("just text\n"), "line 1"));
    CHECK_THROWS_AS(parse_config_file("/nonexistent/sweep.cfg"), ConfigError);
}

TEST_CASE("grid parsing") {
    CHECK(parse_grid("0:5:40").size() == 9);
    CHECK(parse_grid("0:0.1:1").size() == 11);
    CHECK(parse_grid("0:3:10") == std::vector<double>{0, 3, 6, 9});
    CHECK(parse_grid("7") == std::vector<double>{7});
    CHECK(parse_grid(" -5 , 0 , 12.5 ") == std::vector<double>{-5, 0, 12.5});
    CHECK_THROWS_AS(parse_grid("1,1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("0:5"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1,,2"), ConfigError);
}

TEST_CASE("outage sweep over the strong-turbulence preset pair") {
    SweepSpec s = parse_config_text(std::string(kBase) + "detection=imdd\npaths=exact,quadrature\n");
    const auto rows = run_sweep(s);
    REQUIRE(rows.size() == 9);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].snr_db == s.grid[i]);
        REQUIRE(rows[i].quadrature);
        if (i > 0) CHECK(*rows[i].quadrature <= *rows[i - 1].quadrature);
    }
    // Rows where the truncated series is not monotone must carry a truncation flag.
    std::optional<double> prev;
    for (const auto& r : rows) {
        REQUIRE(r.exact);
        REQUIRE(r.tail_estimate);
        if (prev && *r.exact > *prev) CHECK(contains(r.status_text(), "exact:truncation"));
        if (r.status_text() == "ok") {
            if (prev) CHECK(*r.exact <= *prev);
        }
        prev = r.exact;
    }
    CHECK(rows.back().status_text() == "ok");

    // At a 5 dB threshold the series leaves [0, 1] at 0 dB; the row records it and the sweep goes on.
    s.gamma_th_db = 5.0;
    s.grid = {0.0, 40.0};
    const auto two = run_sweep(s);
    CHECK(!two[0].exact);
    CHECK(two[0].failed);
    CHECK(two[0].status_text() == "exact:truncation_failure");
    CHECK(two[0].quadrature);
    CHECK(two[1].status_text() == "ok");
    CHECK(std::abs(*rows.back().exact - *rows.back().quadrature) < 1e-3 * *rows.back().quadrature);
}

TEST_CASE("capacity sweep: exact and quadrature agree per row") {
    const SweepSpec s =
        parse_config_text(std::string(kBase) + "metric=capacity\npaths=exact,quadrature\nsnr_grid=0:10:40\n");
    for (const auto& r : run_sweep(s)) {
        REQUIRE(r.exact);
        REQUIRE(r.quadrature);
        CHECK(std::abs(*r.exact - *r.quadrature) / *r.quadrature < 1e-3);
        CHECK(r.status_text() == "ok");
        CHECK(!r.failed);
    }
}

TEST_CASE("asymptotic path degrades with a flag when m < mu") {
    const std::string text =
        "preset=strong_turbulence\nxi=6.7\ng=0.5\nomega=0.5\nkappa=2\nmu=3\nm=1\npaths=asymptotic\nsnr_grid=20,40\n";
    for (const char* metric : {"capacity", "outage"}) {
        const SweepSpec s = parse_config_text(text + "metric=" + metric + "\n");
        for (const auto& r : run_sweep(s)) {
            REQUIRE(r.asymptotic);
            CHECK(!r.failed);
            CHECK(contains(r.status_text(), metric == std::string("capacity") ? "asymptotic:fallback_quadrature"
                                                                               : "asymptotic:fallback_exact"));
        }
    }
}

TEST_CASE("CSV layout and determinism") {
    const SweepSpec s = parse_config_text(std::string(kBase) +
                                          "paths=exact,monte_carlo\nsnr_grid=20,30,40\nmc_trials=20000\nseed=7\n");
    const auto a = to_csv(s, run_sweep(s));
    const auto b = to_csv(s, run_sweep(s));
    SweepSpec par = s;
    par.workers = 3;
    const auto c = to_csv(par, run_sweep(par));
    CHECK(a == b);
    CHECK(a == c);
    SweepSpec other = s;
    other.seed = 8;
    CHECK(to_csv(other, run_sweep(other)) != a);

    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == std::string(kCsvHeader) + "\r");
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        int commas = 0;
        for (char ch : line) commas += ch == ',';
        CHECK(commas == 7);
        CHECK(contains(line, ",NA,NA,"));  // asymptotic and quadrature not requested
    }
    CHECK(n == 3);

    const std::string path = "sweep_test_out.csv";
    emit_csv(s, run_sweep(s), path);
    std::ifstream f(path, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    CHECK(buf.str() == a);
    std::remove(path.c_str());
}

TEST_CASE("gnuplot script lists the requested columns") {
    const SweepSpec s = parse_config_text(std::string(kBase) + "paths=exact,monte_carlo\n");
    const std::string g = gnuplot_script(s, "out.csv");
    CHECK(contains(g, "'out.csv' using 1:2"));
    CHECK(contains(g, "'out.csv' using 1:5"));
    CHECK(!contains(g, "using 1:3"));
    CHECK(contains(g, "set logscale y"));
}

TEST_CASE("CLI exit codes") {
    const std::string scen = "--preset strong_turbulence --preset rician_shadowed_rf --xi 6.7 --g 0.5 --omega 0.5 ";
    CHECK(cli("capacity " + scen + "--snr-grid 30") == 0);
    CHECK(cli("outage " + scen + "--snr-grid 10,5") == 2);
    CHECK(cli("outage " + scen + "--bogus 1") == 2);
    CHECK(cli("outage --preset strong_turbulence") == 2);
    CHECK(cli("sweep " + scen + "--metric outage --mc-trials 5 --snr-grid 30") == 2);
    CHECK(cli("outage " + scen + "--detection imdd --gamma-th 5 --snr-grid 0,40") == 3);
    CHECK(cli("sweep " + scen + "--metric outage --mc-trials 50000 --print-config") == 0);
}
