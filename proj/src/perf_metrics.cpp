#include "mixedfso/perf_metrics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace mixedfso {

namespace {

using specfun::cdouble;
using specfun::Evaluation;
using specfun::FoxHSpec;
using specfun::QuadratureControl;

constexpr double kTwoLn2 = 2.0 * std::numbers::ln2;
constexpr double kWarnRatio = 1e-3;
// Quadrature paths: outer Gauss-Kronrod tolerance and the tighter Fox-H
// tolerance of the integrand.
constexpr double kOuterTol = 1e-9;
constexpr double kInnerTol = 1e-12;

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double pochhammer(double a, int n) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= a + i;
    return v;
}

bool near_nonpositive_integer(double x, double tol) {
    return x < 0.5 && std::abs(x - std::round(x)) < tol;
}

double recip_gamma(double x) {
    if (near_nonpositive_integer(x, 1e-12)) return 0.0;
    return 1.0 / std::tgamma(x);
}

// c1 = mu_r / B^r, the FSO CMGF argument scale.
double cmgf_scale(const MalagaFsoLink& fso) { return fso.mu_r() / std::pow(fso.big_b(), fso.r()); }

// RF CMGF (1 - M(s)) / s without partial fractions.
double rf_cmgf_direct(const KappaMuShadowedLink& rf, double s) {
    const double lm = (rf.m() - rf.mu()) * std::log1p(rf.theta1() * s) - rf.m() * std::log1p(rf.theta2() * s);
    return -std::expm1(lm) / s;
}

// int_0^inf f by Gauss-Kronrod on geometrically growing panels starting at
// `unit`; stops once a panel beyond `span` adds nothing.
struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

PanelResult integrate_panels(const std::function<double(double)>& f, double unit, double span, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    PanelResult out;
    double a = 0.0, b = unit * 1e-3;
    for (int i = 0; i < 400; ++i) {
        double err = 0.0;
        const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 8, tol, &err);
        out.value += v;
        out.error += err;
        if (b > span && std::abs(v) <= 1e-2 * tol * std::abs(out.value)) return out;
        a = b;
        b *= 4.0;
    }
    throw std::runtime_error("quadrature did not reach the integrand tail");
}

// Sum of residues of
//   prod Gamma(num_j.coef + num_j.weight s) / prod Gamma(den_j.coef + den_j.weight s) z^{-s}
// at the leading pole of each numerator family (s_j = -coef_j / weight_j).
// Isolated simple poles use the gamma-ratio closed form; poles that collide
// with another pole are summed with a contour integral on a small circle.
class LeadingResidues {
public:
    LeadingResidues(std::vector<specfun::ParamPair> num, std::vector<specfun::ParamPair> den, double z)
        : num_(std::move(num)), den_(std::move(den)), log_z_(std::log(z)) {}

    double sum() const {
        std::vector<double> leading;
        for (const auto& f : num_) leading.push_back(-f.coef / f.weight);
        std::sort(leading.begin(), leading.end(), std::greater<>());
        std::vector<std::pair<double, double>> done;  // (center, radius)
        double total = 0.0;
        for (double s0 : leading) {
            bool covered = false;
            for (const auto& [c, rad] : done)
                if (std::abs(s0 - c) < rad) covered = true;
            if (covered) continue;
            const auto poles = all_poles(s0 - 1.0, s0 + 1.0);
            std::vector<double> inside, outside;
            for (double p : poles) (std::abs(p - s0) < kCluster ? inside : outside).push_back(p);
            if (inside.size() == 1) {
                total += simple_residue(s0);
                done.push_back({s0, kCluster});
                continue;
            }
            const double lo = *std::min_element(inside.begin(), inside.end());
            const double hi = *std::max_element(inside.begin(), inside.end());
            const double center = 0.5 * (lo + hi);
            double r_in = 0.5 * (hi - lo), r_out = 1.0;
            for (double p : outside) r_out = std::min(r_out, std::abs(p - center));
            const double radius = 0.5 * (r_in + r_out);
            total += circle_residue(center, radius);
            done.push_back({center, radius});
        }
        return total;
    }

private:
    static constexpr double kCluster = 0.02;

    std::vector<double> all_poles(double lo, double hi) const {
        std::vector<double> out;
        for (const auto& f : num_) {
            for (int i = 0;; ++i) {
                const double p = (-f.coef - i) / f.weight;
                if (p < lo) break;
                if (p <= hi) out.push_back(p);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    double simple_residue(double s0) const {
        double v = std::exp(-s0 * log_z_);
        bool own = false;
        for (const auto& f : num_) {
            const double arg = f.coef + f.weight * s0;
            if (!own && std::abs(arg) < 1e-12) {
                v /= f.weight;
                own = true;
            } else {
                v *= std::tgamma(arg);
            }
        }
        for (const auto& f : den_) v *= recip_gamma(f.coef + f.weight * s0);
        return v;
    }

    double circle_residue(double center, double radius) const {
        constexpr int kPoints = 128;
        cdouble acc = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            const cdouble d = std::polar(radius, 2.0 * std::numbers::pi * (i + 0.5) / kPoints);
            const cdouble s = center + d;
            cdouble lg = -s * log_z_;
            for (const auto& f : num_) lg += specfun::ln_gamma_complex(f.coef + f.weight * s);
            cdouble v = std::exp(lg);
            for (const auto& f : den_) {
                const cdouble arg = f.coef + f.weight * s;
                v *= std::exp(-specfun::ln_gamma_complex(arg));
            }
            acc += v * d;
        }
        return acc.real() / kPoints;
    }

    std::vector<specfun::ParamPair> num_, den_;
    double log_z_;
};

// Kernel of H^{4,0}_{2,4}[z | (xi^2+1-r, r), (n, 1); (n-1, 1), (xi^2-r, r), (alpha-r, r), (k-r, r)].
FoxHSpec outage_block(const MalagaFsoLink& fso, int k, int n) {
    const double r = fso.r(), xi2 = fso.xi_sq();
    FoxHSpec s;
    s.upper = {{xi2 + 1.0 - r, r}, {static_cast<double>(n), 1.0}};
    s.lower = {{n - 1.0, 1.0}, {xi2 - r, r}, {fso.alpha() - r, r}, {k - r, r}};
    s.m = 4;
    return s;
}

double outage_block_asymptotic(const MalagaFsoLink& fso, double k, int n, double z) {
    const double r = fso.r(), xi2 = fso.xi_sq();
    LeadingResidues res({{n - 1.0, 1.0}, {xi2 - r, r}, {fso.alpha() - r, r}, {k - r, r}},
                        {{xi2 + 1.0 - r, r}, {static_cast<double>(n), 1.0}}, z);
    return res.sum();
}

// Shared skeleton of the outage series: for each mixture index k and each
// RF Gamma component, 1 - z sum c_k w e^{-g/th} sum_j th^{-j}/j! sum_p C(j,p) g^{j-p} (g+1)^p X(k, p, th),
// with X supplied by the caller.
template <class Inner>
double outage_skeleton(const Scenario& sc, double z, Inner&& inner) {
    const double g = sc.gamma_th;
    double total = 0.0;
    for (int k = 1; k <= sc.fso.beta(); ++k) {
        const double ck = fso_component_coef(sc.fso, k);
        if (ck == 0.0) continue;
        double sk = 0.0;
        for (const auto& [w, shape, th] : rf_gamma_components(sc.rf)) {
            double sj = 0.0;
            for (int j = 0; j < shape; ++j) {
                double sp = 0.0;
                for (int p = 0; p <= j; ++p)
                    sp += binom(j, p) * std::pow(g, j - p) * std::pow(g + 1.0, p) * inner(k, p, th);
                sj += sp / (std::pow(th, j) * factorial(j));
            }
            sk += w * std::exp(-g / th) * sj;
        }
        total += ck * sk;
    }
    return z * total;
}

double outage_z(const Scenario& sc) { return std::pow(sc.fso.big_b(), sc.fso.r()) * sc.gamma_th / sc.fso.mu_r(); }

void require_gamma_th(const Scenario& sc) {
    if (!(sc.gamma_th > 0.0) || !std::isfinite(sc.gamma_th)) throw std::invalid_argument("gamma_th must be positive");
}

}  // namespace

QuadratureControl capacity_control() {
    QuadratureControl c;
    c.target_rel_tol = 1e-8;
    return c;
}

QuadratureControl outage_control() {
    QuadratureControl c;
    c.target_rel_tol = 1e-12;
    return c;
}

Scenario with_snrs(const Scenario& sc, double fso_avg_snr, double rf_avg_snr) {
    Scenario out{sc.fso.with_avg_snr(fso_avg_snr), sc.rf.with_avg_snr(rf_avg_snr), sc.gamma_th, sc.q_max, sc.l_max};
    return out;
}

Evaluation capacity_kernel_t(const MalagaFsoLink& fso, int k, double x, int y, int z, const QuadratureControl& ctl) {
    specfun::BivariateFoxHSpec spec;
    spec.joint_upper = {{-static_cast<double>(y), 1.0, 1.0}};
    spec.joint_n = 1;
    spec.first = fso_cmgf_spec(fso, k);
    spec.second.upper = {{1.0 - z, 1.0}};
    spec.second.lower = {{0.0, 1.0}};
    spec.second.n = 1;
    spec.second.m = 1;
    return specfun::fox_h_bivariate_eval(spec, cmgf_scale(fso), x, ctl);
}

CapacityResult ergodic_capacity_exact(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    const MalagaFsoLink& fso = sc.fso;
    const int mu = sc.rf.mu(), m = sc.rf.m();
    const double t1 = sc.rf.theta1(), t2 = sc.rf.theta2();
    const RfSeriesCoeffs rc = rf_series_coeffs(sc.rf);

    double value = 0.0, abs_err = 0.0;
    auto t_term = [&](int k, double coef, double x, int y, int z) {
        if (coef == 0.0) return;
        const Evaluation ev = capacity_kernel_t(fso, k, x, y, z, ctl);
        if (!ev.converged) {
            std::ostringstream os;
            os << "capacity kernel T(" << x << ", " << y << ", " << z << ") for mixture index " << k
               << " did not converge";
            throw specfun::NonConvergenceError(os.str(), ev.est_error);
        }
        const double term = coef * ev.value / std::tgamma(static_cast<double>(z));
        value += term;
        abs_err += std::abs(term) * std::max(ev.est_error, ctl.target_rel_tol);
    };

    for (int k = 1; k <= fso.beta(); ++k) {
        const double ck = fso_component_coef(fso, k);
        if (ck == 0.0) continue;
        if (rc.regime == RfRegime::m_ge_mu) {
            for (int l = 1; l <= m; ++l) t_term(k, ck * rc.chi[l - 1], t2, l, m);
        } else {
            for (int p = 0; p <= m; ++p) {
                for (int q = 0; q <= mu - m; ++q) {
                    if (p == 0 && q == 0) continue;
                    const double b = ck * binom(m, p) * binom(mu - m, q) * std::pow(t2, p) * std::pow(t1, q);
                    for (int i = 1; i <= mu - m; ++i) t_term(k, b * rc.delta1[i - 1], t1, p + q, mu - m - i + 1);
                    for (int i = 1; i <= m; ++i) t_term(k, b * rc.delta2[i - 1], t2, p + q, m - i + 1);
                }
            }
        }
    }
    const double pre = fso.r() * cmgf_scale(fso) / kTwoLn2;
    CapacityResult res;
    res.method = CapacityMethod::exact_closed_form;
    res.value = pre * value;
    res.est_error = pre * abs_err;
    return res;
}

CapacityResult capacity_from_cmgfs(const std::function<double(double)>& cmgf1,
                                   const std::function<double(double)>& cmgf2, double tol) {
    auto f = [&](double s) { return s == 0.0 ? 0.0 : s * std::exp(-s) * cmgf1(s) * cmgf2(s); };
    const PanelResult pr = integrate_panels(f, 1.0, 40.0, tol);
    CapacityResult res;
    res.method = CapacityMethod::quadrature;
    res.value = pr.value / kTwoLn2;
    res.est_error = pr.error / kTwoLn2;
    return res;
}

CapacityResult ergodic_capacity_quadrature(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    QuadratureControl inner = ctl;
    inner.target_rel_tol = std::min(ctl.target_rel_tol, kInnerTol);
    return capacity_from_cmgfs([&](double s) { return fso_cmgf(sc.fso, s, inner); },
                               [&](double s) { return rf_cmgf_direct(sc.rf, s); }, kOuterTol);
}

CapacityResult ergodic_capacity_asymptotic(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    const RfSeriesCoeffs rc = rf_series_coeffs(sc.rf);
    if (rc.regime == RfRegime::m_lt_mu)
        throw NotImplementedError(
            "asymptotic capacity has no closed form for m < mu; use ergodic_capacity_quadrature or "
            "ergodic_capacity_exact");
    const MalagaFsoLink& fso = sc.fso;
    const int m = sc.rf.m();
    const double t2 = sc.rf.theta2(), c1 = cmgf_scale(fso);

    double value = 0.0, abs_err = 0.0;
    auto strip = [&](const FoxHSpec& spec, double z) {
        const Evaluation ev = specfun::fox_h_on_strip(spec, z, 0.0, 1.0, ctl);
        if (!ev.converged) throw specfun::NonConvergenceError("asymptotic capacity term did not converge", ev.est_error);
        return ev;
    };
    for (int k = 1; k <= fso.beta(); ++k) {
        const double ck = fso_component_coef(fso, k);
        if (ck == 0.0) continue;
        const FoxHSpec sigma_phi = fso_cmgf_spec(fso, k);
        for (int l = 1; l <= m; ++l) {
            FoxHSpec a;
            a.upper = {{-static_cast<double>(l), 1.0}};
            a.upper.insert(a.upper.end(), sigma_phi.upper.begin(), sigma_phi.upper.end());
            a.n = 5;
            a.lower = {{m - 1.0 - l, 1.0}};
            a.lower.insert(a.lower.end(), sigma_phi.lower.begin(), sigma_phi.lower.end());
            a.m = 2;
            FoxHSpec b;
            b.upper = {{static_cast<double>(m - l), 1.0}};
            b.upper.insert(b.upper.end(), sigma_phi.upper.begin(), sigma_phi.upper.end());
            b.n = 5;
            b.lower = sigma_phi.lower;
            b.m = 1;
            const Evaluation ea = strip(a, c1 / t2);
            const Evaluation eb = strip(b, c1);
            const double ta = ea.value / (std::pow(t2, 1.0 + l) * std::tgamma(static_cast<double>(m)));
            const double tb = std::pow(t2, -m) * eb.value;
            const double coef = ck * rc.chi[l - 1];
            value += coef * (ta + tb);
            abs_err += std::abs(coef) * (std::abs(ta) * std::max(ea.est_error, ctl.target_rel_tol) +
                                         std::abs(tb) * std::max(eb.est_error, ctl.target_rel_tol));
        }
    }
    const double pre = fso.r() * c1 / kTwoLn2;
    CapacityResult res;
    res.method = CapacityMethod::asymptotic;
    res.value = pre * value;
    res.est_error = pre * abs_err;
    return res;
}

OutageResult outage_exact(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    require_gamma_th(sc);
    const double g = sc.gamma_th, z = outage_z(sc);
    const int qm = sc.q_max, lm = sc.l_max;
    std::map<std::pair<int, int>, double> cache;
    auto block = [&](int k, int n) {
        auto it = cache.find({k, n});
        if (it != cache.end()) return it->second;
        const Evaluation ev = specfun::fox_h_eval(outage_block(sc.fso, k, n), z, ctl);
        if (!ev.converged) {
            std::ostringstream os;
            os << "outage block H^{4,0}_{2,4} (k=" << k << ", n=" << n << ") did not converge";
            throw specfun::NonConvergenceError(os.str(), ev.est_error);
        }
        cache[{k, n}] = ev.value;
        return ev.value;
    };

    bool shell_only = false;
    auto inner = [&](int k, int p, double th) {
        double x = 0.0;
        for (int q = 0; q <= qm; ++q) {
            const double qf = ((q % 2 == 0) ? 1.0 : -1.0) * std::pow((g + 1.0) / th, q) / factorial(q);
            for (int l = 0; l <= lm; ++l) {
                if (shell_only && q != qm && l != lm) continue;
                x += qf * pochhammer(p + q, l) / factorial(l) * block(k, p + q + l);
            }
        }
        return x;
    };
    const double series = outage_skeleton(sc, z, inner);
    shell_only = true;
    const double shell = outage_skeleton(sc, z, inner);

    OutageResult res;
    res.method = OutageMethod::exact_series;
    res.value = 1.0 - series;
    res.q_used = qm;
    res.l_used = lm;
    res.tail_estimate = std::abs(shell);
    res.truncation_warning = res.tail_estimate > kWarnRatio * std::abs(res.value);
    if (!(res.value >= 0.0 && res.value <= 1.0)) {
        std::ostringstream os;
        os << "truncated outage series gave " << res.value << " at gamma_th = " << g << " (orders " << qm << ", "
           << lm << ", tail " << res.tail_estimate << ")";
        throw TruncationError(os.str(), res.value);
    }
    return res;
}

OutageResult outage_quadrature(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    require_gamma_th(sc);
    const double g = sc.gamma_th;
    QuadratureControl inner = ctl;
    inner.target_rel_tol = std::min(ctl.target_rel_tol, kInnerTol);
    auto f = [&](double t) {
        if (t == 0.0) return 0.0;
        const double x = g + t;
        return fso_snr_pdf(sc.fso, x, inner) * rf_snr_cdf(sc.rf, g + g * (1.0 + g) / t);
    };
    const double span = std::max({g, 100.0 * fso_snr_mean(sc.fso), 1.0});
    const PanelResult pr = integrate_panels(f, std::max(g, 1e-3), span, kOuterTol);
    OutageResult res;
    res.method = OutageMethod::quadrature;
    res.value = fso_snr_cdf(sc.fso, g, inner) + pr.value;
    res.tail_estimate = pr.error;
    return res;
}

OutageResult outage_asymptotic(const Scenario& sc, const QuadratureControl& ctl) {
    sc.validate();
    require_gamma_th(sc);
    if (rf_series_coeffs(sc.rf).regime == RfRegime::m_lt_mu) {
        OutageResult res = outage_exact(sc, ctl);
        res.method = OutageMethod::numeric_fallback;
        return res;
    }
    const double z = outage_z(sc);
    std::map<std::pair<int, int>, double> cache;
    auto inner = [&](int k, int p, double) {
        auto it = cache.find({k, p});
        if (it != cache.end()) return it->second;
        const double v = outage_block_asymptotic(sc.fso, k, p, z);
        cache[{k, p}] = v;
        return v;
    };
    OutageResult res;
    res.method = OutageMethod::asymptotic;
    res.value = 1.0 - outage_skeleton(sc, z, inner);
    return res;
}

OutageResult outage_gg_nakagami_asymptotic(const Scenario& sc) {
    sc.validate();
    require_gamma_th(sc);
    const MalagaFsoLink& fso = sc.fso;
    const KappaMuShadowedLink& rf = sc.rf;
    if (rf.mu() != rf.m() || rf.kappa() > 1e-6 || fso.g() > 1e-6 || std::abs(fso.omega() - 1.0) > 1e-12)
        throw std::invalid_argument(
            "Gamma-Gamma/Nakagami asymptote requires mu = m, kappa <= 1e-6, g <= 1e-6 and Omega = 1");
    const double r = fso.r(), a = fso.alpha(), b = fso.beta(), gth = sc.gamma_th, gb2 = rf.avg_snr();
    const int m = rf.m();
    const double z = std::pow(a * b * fso.h(), r) * gth / fso.mu_r();
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        for (int p = 0; p <= j; ++p) {
            sum += binom(j, p) * std::pow(m, j) * std::pow(gth, -p) * std::pow(gth + 1.0, p) / factorial(j) *
                   std::pow(gth / gb2, j) * outage_block_asymptotic(fso, b, p, z);
        }
    }
    OutageResult res;
    res.method = OutageMethod::special_case_gg;
    res.value = 1.0 - fso.xi_sq() * std::exp(-m * gth / gb2) / (std::tgamma(a) * std::tgamma(b)) * z * sum;
    return res;
}

DiversityReport diversity_order(const Scenario& sc) {
    sc.validate();
    const double r = sc.fso.r();
    const double terms[4] = {static_cast<double>(sc.rf.mu()), sc.fso.xi_sq() / r, sc.fso.alpha() / r,
                             sc.fso.beta() / r};
    DiversityReport rep;
    int best = 0;
    for (int i = 1; i < 4; ++i)
        if (terms[i] < terms[best]) best = i;
    rep.G_d = terms[best];
    rep.binding_term = static_cast<BindingTerm>(best);

    int k_min = sc.fso.beta();
    for (int k = 1; k <= sc.fso.beta(); ++k) {
        if (sc.fso.weights()[k - 1] > 0.0) {
            k_min = k;
            break;
        }
    }
    rep.tail_slope = std::min({terms[0], terms[1], terms[2], k_min / r});

    // Two decades of SNR once the asymptote is below 1e-4.
    const double f0 = sc.fso.avg_snr(), r0 = sc.rf.avg_snr();
    auto p_at = [&](double t) { return outage_asymptotic(with_snrs(sc, f0 * t, r0 * t)).value; };
    double t = 1.0, p1 = p_at(t);
    for (int i = 0; i < 40 && !(p1 > 0.0 && p1 < 1e-4); ++i) {
        t *= 10.0;
        p1 = p_at(t);
    }
    const double p2 = p_at(10.0 * t);
    rep.fitted_slope = std::log10(p2 / p1);
    const double gc1 = std::pow(p1, -1.0 / rep.G_d) / (f0 * t);
    const double gc2 = std::pow(p2, -1.0 / rep.G_d) / (f0 * 10.0 * t);
    rep.G_c = std::sqrt(gc1 * gc2);
    return rep;
}

}  // namespace mixedfso
