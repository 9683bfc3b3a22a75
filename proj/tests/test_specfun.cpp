#include "doctest.h"

#include "mixedfso/specfun.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace mixedfso::specfun;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

FoxHSpec exp_spec() {
    FoxHSpec s;
    s.lower = {{0.0, 1.0}};
    s.m = 1;
    return s;
}

FoxHSpec gamma_ratio_spec(double a) {
    FoxHSpec s;
    s.upper = {{1.0 - a, 1.0}};
    s.lower = {{0.0, 1.0}};
    s.n = 1;
    s.m = 1;
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("ln_gamma_complex basic values") {
    CHECK(std::abs(ln_gamma_complex({1.0, 0.0})) < 1e-14);
    CHECK(ln_gamma_complex({0.5, 0.0}).real() == doctest::Approx(0.5723649429247001).epsilon(1e-14));
    // 50-digit oracle: mpmath.loggamma(3+4j)
    const cdouble ref(-1.7566267846037841105, 4.7426644380346579282);
    const cdouble v = ln_gamma_complex({3.0, 4.0});
    CHECK(std::abs(v - ref) / std::abs(ref) < 1e-13);
}

TEST_CASE("ln_gamma_complex in the reflected half-plane away from the real axis") {
    // mpmath.loggamma; compared through exp() since branches may differ by 2 pi i
    const std::vector<std::pair<cdouble, cdouble>> refs = {
        {{-0.3, 7.0}, {-11.634424736051268852, 5.3250009182951028939}},
        {{-4.7, -11.0}, {-29.009326686985254382, -6.0248289450111297121}},
        {{0.29, 30.0}, {-46.919194712128980244, 71.706708138102540156}},
    };
    for (const auto& [z, ref] : refs) {
        CHECK(std::abs(std::exp(ln_gamma_complex(z) - ref) - 1.0) < 1e-12);
    }
}

TEST_CASE("ln_gamma_complex matches Boost on the real line and throws at poles") {
    for (double x : {0.1, 0.7, 1.5, 3.25, 10.0, 37.5, 99.0}) {
        CHECK(rel(ln_gamma_complex({x, 0.0}).real(), boost::math::lgamma(x)) < 1e-13);
    }
    for (double x : {-0.5, -1.25, -3.75}) {
        const double g = boost::math::tgamma(x);
        CHECK(rel(std::exp(ln_gamma_complex({x, 0.0})).real(), g) < 1e-12);
    }
    CHECK_THROWS_AS(ln_gamma_complex({0.0, 0.0}), PoleError);
    CHECK_THROWS_AS(ln_gamma_complex({-3.0, 0.0}), PoleError);
}

TEST_CASE("ln_gamma_complex recurrence holds far from the real axis") {
    for (cdouble z : {cdouble(0.3, 50.0), cdouble(-4.2, 30.0), cdouble(7.0, -300.0), cdouble(-20.5, -15.0)}) {
        const cdouble lhs = ln_gamma_complex(z + 1.0) - ln_gamma_complex(z);
        const cdouble rhs = std::log(z);
        // equal modulo 2 pi i
        const double dim = std::remainder(lhs.imag() - rhs.imag(), 2.0 * std::numbers::pi);
        CHECK(std::abs(lhs.real() - rhs.real()) < 1e-11 * (1.0 + std::abs(rhs)));
        CHECK(std::abs(dim) < 1e-10);
    }
}

TEST_CASE("reflection consistency on (-5, 5)") {
    for (int i = 0; i < 400; ++i) {
        const double x = -5.0 + 10.0 * (i + 0.37) / 400.0;
        if (std::abs(x - std::round(x)) < 1e-6) continue;
        const cdouble lhs = ln_gamma_complex({x, 0.0}) + ln_gamma_complex({1.0 - x, 0.0});
        const double expected = std::numbers::pi / boost::math::sin_pi(x);
        CHECK(rel(std::exp(lhs).real(), expected) < 1e-11);
    }
}

TEST_CASE("fox_h identity: exponential reduction over 200 points") {
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-11;
    for (double z : log_grid(1e-3, 50.0, 200)) {
        const double v = fox_h(exp_spec(), z, ctl);
        CHECK(std::abs(v - std::exp(-z)) / std::exp(-z) < 1e-9);
    }
}

TEST_CASE("fox_h identity: gamma-ratio reduction") {
    CHECK(fox_h(gamma_ratio_spec(2.0), 1.0) == doctest::Approx(0.25).epsilon(1e-9));
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-11;
    for (double a : {0.5, 1.0, 2.0, 3.7}) {
        for (double z : log_grid(1e-3, 50.0, 50)) {
            const double ref = std::tgamma(a) * std::pow(1.0 + z, -a);
            CHECK(rel(fox_h(gamma_ratio_spec(a), z, ctl), ref) < 1e-9);
        }
    }
}

TEST_CASE("meijer_g reductions") {
    const std::vector<double> none;
    const std::vector<double> zero = {0.0};
    CHECK(meijer_g(1, 0, none, zero, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));

    // G^{2,0}_{0,2}(z | nu/2, -nu/2) = 2 K_nu(2 sqrt z)
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-11;
    const std::vector<double> b0 = {0.0, 0.0};
    CHECK(meijer_g(2, 0, none, b0, 1.0, ctl) ==
          doctest::Approx(0.2277877454990668713).epsilon(1e-10));
    for (double nu : {0.0, 0.6, 1.5}) {
        const std::vector<double> b = {nu / 2, -nu / 2};
        for (double z : log_grid(1e-3, 50.0, 60)) {
            const double ref = 2.0 * boost::math::cyl_bessel_k(nu, 2.0 * std::sqrt(z));
            CHECK(rel(meijer_g(2, 0, none, b, z, ctl), ref) < 1e-9);
        }
    }
}

TEST_CASE("fox_h with unit weights equals meijer_g") {
    const std::vector<double> up = {3.1, 1.0};
    const std::vector<double> lo = {0.0, 2.3, 1.7, 2.0};
    FoxHSpec s = meijer_as_fox(4, 0, up, lo);
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-12;
    for (double z : {0.01, 0.3, 2.0, 9.0}) {
        CHECK(rel(fox_h(s, z, ctl), meijer_g(4, 0, up, lo, z, ctl)) < 1e-10);
    }
}

TEST_CASE("Meijer G^{4,0}_{2,4} equals the product-of-gammas CCDF with pointing loss") {
    // xi^2/(Gamma(a)Gamma(b)) G^{4,0}_{2,4}[z | xi^2+1, 1; 0, xi^2, a, b] = P(Ga Gb U^{1/xi^2} > z)
    const double a = 2.29, b = 2.0, xi2 = 1.69;
    const std::vector<double> up = {xi2 + 1.0, 1.0};
    const std::vector<double> lo = {0.0, xi2, a, b};
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    boost::math::quadrature::exp_sinh<double> es;
    for (double z : {0.05, 0.8, 3.0, 12.0}) {
        auto inner = [&](double u) {
            const double scale = std::pow(u, 1.0 / xi2);
            auto over_g = [&](double g) {
                const double fb = std::exp((b - 1) * std::log(g) - g - std::lgamma(b));
                return boost::math::gamma_q(a, z / (g * scale)) * fb;
            };
            return es.integrate(over_g, 1e-13);
        };
        const double ref = gk.integrate(inner, 0.0, 1.0, 15, 1e-12);
        const double v = xi2 / (std::tgamma(a) * std::tgamma(b)) * meijer_g(4, 0, up, lo, z);
        CHECK(rel(v, ref) < 1e-7);
    }
}

TEST_CASE("H^{3,0}_{1,3} with weight r is the density of (Ga Gk U^{1/xi^2})^r") {
    const double a = 4.2, k = 2.0, xi2 = 2.25;
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    boost::math::quadrature::exp_sinh<double> es;
    for (double r : {1.0, 2.0}) {
        FoxHSpec s;
        s.upper = {{xi2 + 1.0 - r, r}};
        s.lower = {{xi2 - r, r}, {a - r, r}, {k - r, r}};
        s.m = 3;
        for (double w : {0.3, 2.0, 9.0}) {
            // density of Z at z = w^{1/r}, Z = Ga * Y, Y = Gk U^{1/xi^2}
            const double z = std::pow(w, 1.0 / r);
            auto inner = [&](double u) {
                const double scale = std::pow(u, 1.0 / xi2);
                auto over_g = [&](double g) {
                    const double y = g * scale;
                    const double fk = std::exp((k - 1) * std::log(g) - g - std::lgamma(k));
                    const double x = z / y;
                    const double fa = std::exp((a - 1) * std::log(x) - x - std::lgamma(a));
                    return fa / y * fk;
                };
                return es.integrate(over_g, 1e-13);
            };
            const double fz = gk.integrate(inner, 0.0, 1.0, 15, 1e-12);
            const double fw = fz * std::pow(w, 1.0 / r - 1.0) / r;
            const double v = xi2 / (std::tgamma(a) * std::tgamma(k)) * fox_h(s, w);
            CHECK(rel(v, fw) < 1e-7);
        }
    }
}

TEST_CASE("fox_h error paths") {
    FoxHSpec bad;
    bad.upper = {{0.5, 1.0}};
    bad.lower = {{0.0, 1.0}};
    bad.n = 1;
    bad.m = 1;
    // left pole at 0, right poles at 0.5 + k: separable
    CHECK_NOTHROW(fox_h(bad, 1.0));
    bad.upper[0].coef = 2.0;  // right poles at -1 + k collide with left poles
    CHECK_THROWS_AS(fox_h(bad, 1.0), PoleCollisionError);

    FoxHSpec divergent;
    divergent.upper = {{1.0, 1.0}};
    divergent.lower = {{0.0, 1.0}};
    divergent.m = 1;  // a* = 0
    CHECK_THROWS_AS(fox_h(divergent, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fox_h(exp_spec(), -1.0), std::invalid_argument);

    QuadratureControl tiny;
    tiny.max_nodes = 64;
    tiny.target_rel_tol = 1e-14;
    CHECK_THROWS_AS(fox_h(gamma_ratio_spec(2.0), 3.0, tiny), NonConvergenceError);
    QuadratureControl bad_ctl;
    bad_ctl.max_nodes = 10;
    CHECK_THROWS_AS(fox_h(exp_spec(), 1.0, bad_ctl), std::invalid_argument);
}

TEST_CASE("doubling max_nodes never increases the error estimate") {
    const std::vector<double> up = {3.1, 1.0};
    const std::vector<double> lo = {0.0, 2.3, 1.7, 2.0};
    const FoxHSpec s = meijer_as_fox(4, 0, up, lo);
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-13;
    double last = INFINITY;
    for (std::size_t n = 64; n <= (1u << 15); n *= 2) {
        ctl.max_nodes = n;
        const Evaluation ev = fox_h_eval(s, 0.7, ctl);
        CHECK(ev.est_error <= last);
        last = ev.est_error;
    }
    CHECK(last < 1e-12);
}

TEST_CASE("fox_h is deterministic and honours an explicit contour") {
    const FoxHSpec s = gamma_ratio_spec(1.5);
    CHECK(fox_h(s, 0.4) == fox_h(s, 0.4));
    QuadratureControl ctl;
    ctl.contour_shift = 0.2;
    ctl.target_rel_tol = 1e-11;
    CHECK(rel(fox_h(s, 0.4, ctl), std::tgamma(1.5) * std::pow(1.4, -1.5)) < 1e-9);
    ctl.contour_shift = 2.0;
    CHECK_THROWS_AS(fox_h(s, 0.4, ctl), PoleCollisionError);
}

TEST_CASE("fox_h_on_strip integrates along a caller-given strip") {
    // Gamma(s) Gamma(-s): families share s = 0; on (0, 1) the line value is -ln(1 + 1/z)
    FoxHSpec s;
    s.upper = {{1.0, 1.0}};
    s.lower = {{0.0, 1.0}};
    s.n = 1;
    s.m = 1;
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-11;
    for (double z : {2.0, 5.0, 40.0}) {
        const Evaluation ev = fox_h_on_strip(s, z, 0.0, 1.0, ctl);
        CHECK(ev.converged);
        CHECK(rel(ev.value, -std::log1p(1.0 / z)) < 1e-9);
    }
    CHECK_THROWS_AS(fox_h_on_strip(s, 2.0, -0.5, 0.5, ctl), PoleCollisionError);
}

TEST_CASE("bivariate separability with an empty joint block") {
    BivariateFoxHSpec b;
    b.first = gamma_ratio_spec(2.0);
    b.second = exp_spec();
    QuadratureControl ctl;
    ctl.target_rel_tol = 1e-10;
    for (auto [x, y] : {std::pair{0.5, 0.3}, std::pair{2.0, 1.7}, std::pair{7.0, 0.05}}) {
        const double v = fox_h_bivariate(b, x, y, ctl);
        const double ref = fox_h(b.first, x, ctl) * fox_h(b.second, y, ctl);
        CHECK(rel(v, ref) < 1e-8);
    }
}

TEST_CASE("bivariate H with a joint gamma matches the Laplace-type integral") {
    // H[x, y] with joint Gamma(1 + c - u - v), first = exp kernel, second = Gamma(v)Gamma(z - v)
    // equals int_0^inf s^c e^{-s} e^{-x s} Gamma(z) (1 + y s)^{-z} ds.
    const double c = 1.0, zz = 2.0;
    BivariateFoxHSpec b;
    b.joint_upper = {{-c, 1.0, 1.0}};
    b.joint_n = 1;
    b.first = exp_spec();
    b.second = gamma_ratio_spec(zz);
    boost::math::quadrature::exp_sinh<double> es;
    for (auto [x, y] : {std::pair{0.5, 3.0}, std::pair{2.0, 0.2}}) {
        auto f = [&](double s) { return std::pow(s, c) * std::exp(-s - x * s) * std::tgamma(zz) * std::pow(1 + y * s, -zz); };
        const double ref = es.integrate(f, 1e-14);
        CHECK(rel(fox_h_bivariate(b, x, y), ref) < 1e-7);
    }
}

TEST_CASE("bivariate validation") {
    BivariateFoxHSpec b;
    b.first = exp_spec();
    b.second = exp_spec();
    b.joint_upper = {{0.0, -1.0, 1.0}};
    b.joint_n = 1;
    CHECK_THROWS_AS(fox_h_bivariate(b, 1.0, 1.0), std::invalid_argument);
}
