#include "mixedfso/channel_models.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mixedfso {

namespace {

using specfun::FoxHSpec;
using specfun::QuadratureControl;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWeightSumTol = 1e-10;
constexpr int kNbMaxTerms = 100000;

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

double log_binom(int n, int k) { return std::log(binom(n, k)); }

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

void require_x(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("argument must be positive and finite");
}

// ln 1F1(a; b; z) for a, b, z > 0 by the power series, rescaled to stay finite.
double log_hyp1f1_series(double a, double b, double z) {
    constexpr int kMaxTerms = 10000;
    constexpr double kRescale = 1e250;
    double sum = 1.0, term = 1.0, log_scale = 0.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        const double ratio = (a + n) / (b + n) * z / (n + 1.0);
        term *= ratio;
        sum += term;
        if (sum > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            log_scale += std::log(kRescale);
        }
        if (ratio < 1.0 && term < 1e-15 * sum) return log_scale + std::log(sum);
    }
    throw std::runtime_error("1F1 power series did not converge within 10^4 terms (z = " + std::to_string(z) + ")");
}

}  // namespace

MalagaFsoLink::MalagaFsoLink(double alpha, int beta, double g, double omega, double xi, double a0, Detection detection,
                             double avg_snr)
    : alpha_(alpha), g_(g), omega_(omega), xi_(xi), a0_(a0), avg_snr_(avg_snr), beta_(beta), detection_(detection) {
    require_positive(alpha, "alpha");
    if (beta < 1) throw std::invalid_argument("beta must be an integer >= 1");
    if (!(g > 0.0) || !std::isfinite(g))
        throw std::invalid_argument("g must be positive (use the gamma_gamma preset, g = 1e-6, for the g -> 0 limit)");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("Omega must be non-negative");
    require_positive(xi, "xi");
    require_positive(a0, "A0");
    require_positive(avg_snr, "avg_snr");
    if (detection != Detection::heterodyne && detection != Detection::imdd)
        throw std::invalid_argument("detection must be heterodyne or imdd");

    const double xi2 = xi * xi;
    const double gb = g * beta + omega;
    h_ = xi2 / (xi2 + 1.0);
    big_b_ = alpha * beta * h_ * (g + omega) / gb;
    scale_ = gb / (alpha * beta);

    log_a_ = 0.5 * alpha * std::log(alpha) + (beta + 0.5 * alpha) * std::log(g * beta / gb) - (1.0 + 0.5 * alpha) * std::log(g);
    double total = 0.0;
    for (int k = 1; k <= beta; ++k) {
        double lb;
        if (k > 1 && omega == 0.0) {
            lb = kNegInf;
        } else {
            lb = log_binom(beta - 1, k - 1) + (1.0 - 0.5 * k) * std::log(gb) + 0.5 * (alpha + k) * std::log(gb / (alpha * beta)) +
                 (k > 1 ? (k - 1) * std::log(omega / g) : 0.0) + 0.5 * k * std::log(alpha / beta);
        }
        log_b_.push_back(lb);
        weights_.push_back(std::exp(log_a_ + lb));
        total += weights_.back();
    }
    if (std::abs(total - 1.0) > kWeightSumTol)
        throw std::logic_error("Malaga mixture weights sum to " + std::to_string(total) + " instead of 1");

    if (detection == Detection::heterodyne) {
        mu_r_ = avg_snr;
    } else {
        const double den = (alpha + 1.0) * (2.0 * g * (g + 2.0 * omega) + omega * omega * (1.0 + 1.0 / beta));
        mu_r_ = avg_snr * alpha * xi2 / ((xi2 + 1.0) * (xi2 + 1.0)) * (xi2 + 2.0) * (g + omega) / den;
    }
}

MalagaFsoLink MalagaFsoLink::gamma_gamma(double alpha, int beta, double xi, double a0, Detection detection,
                                         double avg_snr) {
    return MalagaFsoLink(alpha, beta, 1e-6, 1.0, xi, a0, detection, avg_snr);
}

MalagaFsoLink MalagaFsoLink::k_distribution(double alpha, double g, double omega, double xi, double a0,
                                            Detection detection, double avg_snr) {
    return MalagaFsoLink(alpha, 1, g, omega, xi, a0, detection, avg_snr);
}

MalagaFsoLink MalagaFsoLink::with_avg_snr(double avg_snr) const {
    return MalagaFsoLink(alpha_, beta_, g_, omega_, xi_, a0_, detection_, avg_snr);
}

KappaMuShadowedLink::KappaMuShadowedLink(double kappa, int mu, int m, double avg_snr)
    : kappa_(kappa), mu_(mu), m_(m), avg_snr_(avg_snr) {
    require_positive(kappa, "kappa");
    if (mu < 1) throw std::invalid_argument("mu must be an integer >= 1");
    if (m < 1) throw std::invalid_argument("m must be an integer >= 1");
    require_positive(avg_snr, "avg_snr");
    theta1_ = avg_snr / (mu * (1.0 + kappa));
    theta2_ = avg_snr * (mu * kappa + m) / (mu * m * (1.0 + kappa));
}

KappaMuShadowedLink KappaMuShadowedLink::nakagami(int m, double avg_snr) { return {1e-8, m, m, avg_snr}; }

KappaMuShadowedLink KappaMuShadowedLink::rayleigh(double avg_snr) { return {1e-8, 1, 1, avg_snr}; }

KappaMuShadowedLink KappaMuShadowedLink::with_avg_snr(double avg_snr) const { return {kappa_, mu_, m_, avg_snr}; }

void Scenario::validate() const {
    if (!(gamma_th > 0.0) || !std::isfinite(gamma_th)) throw std::invalid_argument("gamma_th must be positive");
    if (q_max < 0 || l_max < 0) throw std::invalid_argument("truncation orders must be non-negative");
}

double electrical_snr(const MalagaFsoLink& link) { return link.mu_r(); }

double fso_component_coef(const MalagaFsoLink& link, int k) {
    return link.weights()[k - 1] * link.xi_sq() / (std::tgamma(link.alpha()) * std::tgamma(static_cast<double>(k)));
}

FoxHSpec fso_pdf_spec(const MalagaFsoLink& link, int k) {
    const double r = link.r(), xi2 = link.xi_sq();
    FoxHSpec s;
    s.upper = {{xi2 + 1.0 - r, r}};
    s.lower = {{xi2 - r, r}, {link.alpha() - r, r}, {k - r, r}};
    s.m = 3;
    return s;
}

FoxHSpec fso_cmgf_spec(const MalagaFsoLink& link, int k) {
    const double r = link.r(), xi2 = link.xi_sq();
    FoxHSpec s;
    s.upper = {{1.0 - r, r}, {1.0 - xi2 - r, r}, {1.0 - link.alpha() - r, r}, {1.0 - k - r, r}};
    s.lower = {{0.0, 1.0}, {-xi2 - r, r}, {-r, r}};
    s.n = 4;
    s.m = 1;
    return s;
}

double fso_irradiance_pdf(const MalagaFsoLink& link, double x, const QuadratureControl& ctl) {
    require_x(x);
    const double z = x / (link.scale() * link.a0());
    const double xi2 = link.xi_sq();
    double total = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        const double c = fso_component_coef(link, k);
        if (c == 0.0) continue;
        const std::vector<double> up = {xi2 + 1.0};
        const std::vector<double> lo = {xi2, link.alpha(), static_cast<double>(k)};
        total += c * specfun::meijer_g(3, 0, up, lo, z, ctl);
    }
    return total / x;
}

double fso_snr_ccdf(const MalagaFsoLink& link, double x, const QuadratureControl& ctl) {
    require_x(x);
    const double z = link.big_b() * std::pow(x / link.mu_r(), 1.0 / link.r());
    const double xi2 = link.xi_sq();
    double total = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        const double c = fso_component_coef(link, k);
        if (c == 0.0) continue;
        const std::vector<double> up = {xi2 + 1.0, 1.0};
        const std::vector<double> lo = {0.0, xi2, link.alpha(), static_cast<double>(k)};
        total += c * specfun::meijer_g(4, 0, up, lo, z, ctl);
    }
    return total;
}

double fso_snr_cdf(const MalagaFsoLink& link, double x, const QuadratureControl& ctl) {
    require_x(x);
    const double z = link.big_b() * std::pow(x / link.mu_r(), 1.0 / link.r());
    const double xi2 = link.xi_sq();
    double total = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        const double c = fso_component_coef(link, k);
        if (c == 0.0) continue;
        const std::vector<double> up = {1.0, xi2 + 1.0};
        const std::vector<double> lo = {xi2, link.alpha(), static_cast<double>(k), 0.0};
        total += c * specfun::meijer_g(3, 1, up, lo, z, ctl);
    }
    return total;
}

double fso_snr_pdf(const MalagaFsoLink& link, double x, const QuadratureControl& ctl) {
    require_x(x);
    const double br = std::pow(link.big_b(), link.r());
    const double z = br * x / link.mu_r();
    double total = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        const double c = fso_component_coef(link, k);
        if (c == 0.0) continue;
        total += c * specfun::fox_h(fso_pdf_spec(link, k), z, ctl);
    }
    return total * br / link.mu_r();
}

double fso_cmgf(const MalagaFsoLink& link, double s, const QuadratureControl& ctl) {
    require_x(s);
    const double br = std::pow(link.big_b(), link.r());
    const double z = link.mu_r() * s / br;
    double total = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        const double c = fso_component_coef(link, k);
        if (c == 0.0) continue;
        total += c * specfun::fox_h(fso_cmgf_spec(link, k), z, ctl);
    }
    return total * link.r() * link.mu_r() / br;
}

double fso_snr_mean(const MalagaFsoLink& link) {
    const double r = link.r(), xi2 = link.xi_sq(), a = link.alpha();
    double moment = 0.0;
    for (int k = 1; k <= link.beta(); ++k) {
        moment += link.weights()[k - 1] * std::exp(std::lgamma(a + r) - std::lgamma(a) + std::lgamma(k + r) - std::lgamma(k));
    }
    moment *= xi2 / (xi2 + r);
    return link.mu_r() * std::pow(link.scale() / (link.h() * (link.g() + link.omega())), r) * moment;
}

double rf_snr_pdf(const KappaMuShadowedLink& link, double x) {
    require_x(x);
    const double mu = link.mu(), m = link.m(), kappa = link.kappa(), gb = link.avg_snr();
    if (x / link.theta2() > 200.0) return 0.0;
    const double t = x / gb;
    const double log_pref = mu * std::log(mu) + m * std::log(m) + mu * std::log1p(kappa) - std::lgamma(mu) - std::log(gb) -
                            m * std::log(mu * kappa + m);
    const double arg = mu * mu * kappa * (1.0 + kappa) / (mu * kappa + m) * t;
    return std::exp(log_pref + (mu - 1.0) * std::log(t) - mu * (1.0 + kappa) * t + log_hyp1f1_series(m, mu, arg));
}

double rf_mgf(const KappaMuShadowedLink& link, double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("MGF argument must be non-negative");
    return std::pow(link.theta1() * s + 1.0, link.m() - link.mu()) / std::pow(link.theta2() * s + 1.0, link.m());
}

RfSeriesCoeffs rf_series_coeffs(const KappaMuShadowedLink& link) {
    const int mu = link.mu(), m = link.m();
    const double t1 = link.theta1(), t2 = link.theta2();
    const double rho = m / (mu * link.kappa() + m);
    const double omg = mu * link.kappa() / (mu * link.kappa() + m);
    RfSeriesCoeffs c;
    if (m >= mu) {
        c.regime = RfRegime::m_ge_mu;
        for (int l = 1; l <= m; ++l) {
            double v = binom(m, l) * std::pow(t2, l);
            if (l <= m - mu) v -= binom(m - mu, l) * std::pow(t1, l);
            c.chi.push_back(v);
        }
        for (int i = 0; i <= m - mu; ++i) c.upsilon.push_back(binom(m - mu, i) * std::pow(rho, i) * std::pow(omg, m - mu - i));
    } else {
        c.regime = RfRegime::m_lt_mu;
        const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
        for (int i = 1; i <= mu - m; ++i)
            c.delta1.push_back(sign_m * binom(m + i - 2, i - 1) * std::pow(rho, m) * std::pow(omg, -m - i + 1));
        for (int i = 1; i <= m; ++i) {
            const double sign = ((i - 1) % 2 == 0) ? 1.0 : -1.0;
            c.delta2.push_back(sign * binom(mu - m + i - 2, i - 1) * std::pow(rho, i - 1) * std::pow(omg, m - mu - i + 1));
        }
    }
    return c;
}

std::vector<GammaComponent> rf_gamma_components(const KappaMuShadowedLink& link) {
    const int mu = link.mu(), m = link.m();
    const RfSeriesCoeffs c = rf_series_coeffs(link);
    std::vector<GammaComponent> out;
    if (c.regime == RfRegime::m_ge_mu) {
        for (int i = 0; i <= m - mu; ++i) out.push_back({c.upsilon[i], m - i, link.theta2()});
    } else {
        for (int i = 1; i <= mu - m; ++i) out.push_back({c.delta1[i - 1], mu - m - i + 1, link.theta1()});
        for (int i = 1; i <= m; ++i) out.push_back({c.delta2[i - 1], m - i + 1, link.theta2()});
    }
    return out;
}

double rf_cmgf(const KappaMuShadowedLink& link, double s) {
    require_x(s);
    const int mu = link.mu(), m = link.m();
    const double t1 = link.theta1(), t2 = link.theta2();
    const RfSeriesCoeffs c = rf_series_coeffs(link);
    if (c.regime == RfRegime::m_ge_mu) {
        // sum_l chi_l s^{l-1} H^{1,1}_{1,1}[theta2 s | (1-m,1); (0,1)] / Gamma(m)
        double total = 0.0;
        for (int l = 1; l <= m; ++l) total += c.chi[l - 1] * std::pow(s, l - 1);
        return total * std::pow(1.0 + t2 * s, -m);
    }
    double bracket = 0.0;
    for (int i = 1; i <= mu - m; ++i) bracket += c.delta1[i - 1] * std::pow(1.0 + t1 * s, -(mu - m - i + 1));
    for (int i = 1; i <= m; ++i) bracket += c.delta2[i - 1] * std::pow(1.0 + t2 * s, -(m - i + 1));
    double poly = 0.0;
    for (int p = 0; p <= m; ++p) {
        for (int q = 0; q <= mu - m; ++q) {
            if (p == 0 && q == 0) continue;
            poly += binom(m, p) * binom(mu - m, q) * std::pow(t2, p) * std::pow(t1, q) * std::pow(s, p + q - 1);
        }
    }
    return poly * bracket;
}

double rf_snr_ccdf(const KappaMuShadowedLink& link, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("CCDF argument must be non-negative");
    double total = 0.0;
    for (const auto& [w, shape, scale] : rf_gamma_components(link)) {
        const double y = x / scale;
        double term = 1.0, sum = 1.0;
        for (int j = 1; j < shape; ++j) {
            term *= y / j;
            sum += term;
        }
        total += w * std::exp(-y) * sum;
    }
    return total;
}

double rf_snr_cdf(const KappaMuShadowedLink& link, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("CDF argument must be non-negative");
    if (link.m() >= link.mu()) {
        double total = 0.0;
        for (const auto& [w, shape, scale] : rf_gamma_components(link)) total += w * boost::math::gamma_p(shape, x / scale);
        return total;
    }
    // Negative-binomial mixture of Gamma(mu + n, theta1) laws; all weights
    // positive, so small CDF values keep their relative accuracy.
    const double mu = link.mu(), m = link.m(), kappa = link.kappa();
    const double omg = mu * kappa / (mu * kappa + m);
    const double y = x / link.theta1();
    const bool lower = boost::math::gamma_p(mu, y) < 0.5;
    double w = std::pow(m / (mu * kappa + m), m), total = 0.0;
    for (int n = 0; n < kNbMaxTerms; ++n) {
        const double part = lower ? boost::math::gamma_p(mu + n, y) : boost::math::gamma_q(mu + n, y);
        total += w * part;
        w *= (m + n) / (n + 1.0) * omg;
        // Remaining weight once the term ratio has dropped below one; gamma_p
        // falls and gamma_q rises with the shape, bounding the tail.
        const double ratio = (m + n + 1.0) / (n + 2.0) * omg;
        if (ratio >= 1.0) continue;
        const double rest = w / (1.0 - ratio);
        const double bound = lower ? rest * part : rest;
        if (bound <= 1e-17 * (lower ? total : 1.0)) return lower ? total : 1.0 - total;
    }
    throw std::runtime_error("kappa-mu shadowed CDF series did not converge");
}

}  // namespace mixedfso
