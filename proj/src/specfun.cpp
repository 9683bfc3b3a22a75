#include "mixedfso/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mixedfso::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;
constexpr double kLnPi = 1.144729885849400174143427351353;

// B_{2k} / (2k (2k - 1)), k = 1..10
constexpr std::array<double, 10> kStirling = {
    1.0 / 12.0,          -1.0 / 360.0,         1.0 / 1260.0,          -1.0 / 1680.0,
    1.0 / 1188.0,        -691.0 / 360360.0,    1.0 / 156.0,           -3617.0 / 122400.0,
    43867.0 / 244188.0,  -174611.0 / 125400.0,
};

constexpr double kStirlingMinAbs = 8.0;
constexpr double kUnderflowLog = -800.0;

cdouble stirling(cdouble z) {
    const cdouble inv = 1.0 / z;
    const cdouble inv2 = inv * inv;
    cdouble term = inv;
    cdouble series = 0.0;
    for (double c : kStirling) {
        series += c * term;
        term *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + kLnSqrt2Pi + series;
}

// log sin(pi z) without overflow for large |Im z|; the imaginary part is
// only defined modulo 2 pi.
cdouble log_sin_pi(cdouble z) {
    const cdouble w = kPi * z;
    const cdouble i(0.0, 1.0);
    if (std::abs(w.imag()) < 20.0) return std::log(std::sin(w));
    if (w.imag() > 0.0) {
        return -i * w - cdouble(std::numbers::ln2, -kPi / 2) + std::log(1.0 - std::exp(2.0 * i * w));
    }
    return i * w - cdouble(std::numbers::ln2, kPi / 2) + std::log(1.0 - std::exp(-2.0 * i * w));
}

bool is_nonpositive_integer(cdouble z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real());
}

cdouble ln_gamma_right(cdouble z) {
    // Re z >= 0.5
    if (std::abs(z) >= kStirlingMinAbs) return stirling(z);
    cdouble shift = 0.0;
    while (std::abs(z) < kStirlingMinAbs) {
        shift += std::log(z);
        z += 1.0;
    }
    return stirling(z) - shift;
}

// ln Gamma(z) modulo 2 pi i: the upward shift takes a single log of the
// product. +inf at the poles.
cdouble ln_gamma_mod(cdouble z) {
    if (is_nonpositive_integer(z)) return {kInf, 0.0};
    const bool reflect = z.real() < 0.5;
    cdouble w = reflect ? 1.0 - z : z;
    cdouble prod = 1.0;
    while (std::abs(w) < kStirlingMinAbs) {
        prod *= w;
        w += 1.0;
    }
    const cdouble right = stirling(w) - std::log(prod);
    return reflect ? kLnPi - log_sin_pi(z) - right : right;
}

// -ln Gamma(z) modulo 2 pi i, returning -inf at the zeros of 1/Gamma.
cdouble ln_recip_gamma(cdouble z) {
    if (is_nonpositive_integer(z)) return {-kInf, 0.0};
    return -ln_gamma_mod(z);
}

struct LinearGamma {
    double coef;
    double slope;
    cdouble arg(cdouble s) const { return coef + slope * s; }
};

class GammaKernel {
public:
    std::vector<LinearGamma> num;
    std::vector<LinearGamma> den;
    double log_z = 0.0;

    cdouble log_eval(cdouble s) const {
        cdouble acc = -s * log_z;
        for (const auto& g : den) {
            const cdouble r = ln_recip_gamma(g.arg(s));
            if (std::isinf(r.real())) return {-kInf, 0.0};
            acc += r;
        }
        for (const auto& g : num) acc += ln_gamma_mod(g.arg(s));
        return acc;
    }

    double left_bound() const {
        double l = -kInf;
        for (const auto& g : num)
            if (g.slope > 0.0) l = std::max(l, -g.coef / g.slope);
        return l;
    }
    double right_bound() const {
        double r = kInf;
        for (const auto& g : num)
            if (g.slope < 0.0) r = std::min(r, -g.coef / g.slope);
        return r;
    }

    // Distance of real s to the nearest numerator pole or denominator zero.
    double singular_distance(double s) const {
        double d = kInf;
        auto visit = [&](const LinearGamma& g) {
            const double a = g.coef + g.slope * s;
            if (a > 0.5) return;
            const double nearest = std::min(0.0, std::round(a));
            d = std::min(d, std::abs(a - nearest) / std::abs(g.slope));
        };
        for (const auto& g : num) visit(g);
        for (const auto& g : den) visit(g);
        return d;
    }

    bool has_pole_in(double lo, double hi) const {
        for (const auto& g : num) {
            // poles at coef + slope s = -k, k = 0, 1, ...
            const double s0 = -g.coef / g.slope;
            if (g.slope > 0.0) {
                if (s0 > lo && s0 < hi) return true;
                // s0 - k / slope for k >= 0 enters (lo, hi) only if s0 >= hi
                if (s0 >= hi) {
                    const double k = std::ceil((s0 - hi) * g.slope);
                    const double sk = s0 - k / g.slope;
                    if (sk > lo && sk < hi) return true;
                    if (sk == hi) {
                        const double sk1 = s0 - (k + 1) / g.slope;
                        if (sk1 > lo) return true;
                    }
                }
            } else {
                if (s0 > lo && s0 < hi) return true;
                if (s0 <= lo) {
                    const double k = std::ceil((lo - s0) * (-g.slope));
                    const double sk = s0 + k / (-g.slope);
                    if (sk > lo && sk < hi) return true;
                    if (sk == lo) {
                        const double sk1 = s0 + (k + 1) / (-g.slope);
                        if (sk1 < hi) return true;
                    }
                }
            }
        }
        return false;
    }
};

GammaKernel kernel_of(const FoxHSpec& spec, double log_z) {
    GammaKernel k;
    k.log_z = log_z;
    for (std::size_t j = 0; j < spec.lower.size(); ++j) {
        const auto& [b, B] = spec.lower[j];
        if (j < spec.m)
            k.num.push_back({b, B});
        else
            k.den.push_back({1.0 - b, -B});
    }
    for (std::size_t j = 0; j < spec.upper.size(); ++j) {
        const auto& [a, A] = spec.upper[j];
        if (j < spec.n)
            k.num.push_back({1.0 - a, -A});
        else
            k.den.push_back({a, A});
    }
    return k;
}

double phi_real(const GammaKernel& k, double c) {
    if (k.singular_distance(c) < 1e-7) return kInf;
    const double v = k.log_eval({c, 0.0}).real();
    return std::isfinite(v) ? v : kInf;
}

double golden_min(const GammaKernel& k, double a, double b) {
    constexpr double g = 0.6180339887498949;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = phi_real(k, x1), f2 = phi_real(k, x2);
    for (int it = 0; it < 80 && (b - a) > 1e-5 * (1.0 + std::abs(a)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi_real(k, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi_real(k, x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

// Minimizes the real-axis integrand magnitude over the strip (lo, hi); the
// vertical line through the minimum crosses the kernel's saddle, which keeps
// cancellation in the oscillatory integral small.
double choose_contour(const GammaKernel& k, double lo, double hi) {
    std::vector<double> cand;
    if (std::isfinite(lo) && std::isfinite(hi)) {
        const double w = hi - lo;
        for (double f : {1e-4, 1e-3, 3e-3, 1e-2, 3e-2}) {
            cand.push_back(lo + f * w);
            cand.push_back(hi - f * w);
        }
        for (int i = 1; i < 20; ++i) cand.push_back(lo + w * i / 20.0);
    } else if (std::isfinite(lo) || std::isfinite(hi)) {
        const double base = std::isfinite(lo) ? lo : hi;
        const double dir = std::isfinite(lo) ? 1.0 : -1.0;
        for (double f : {1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.25}) cand.push_back(base + dir * f);
        double step = 0.5, off = 0.5, best = kInf;
        int rising = 0;
        while (off < 1e9 && rising < 4) {
            const double c = base + dir * off;
            cand.push_back(c);
            const double v = phi_real(k, c);
            if (v < best) {
                best = v;
                rising = 0;
            } else {
                ++rising;
            }
            off += step;
            step *= 1.3;
        }
    } else {
        for (double c = -40.0; c <= 40.0; c += 0.5) cand.push_back(c);
    }
    std::sort(cand.begin(), cand.end());
    std::size_t best = 0;
    double fbest = kInf;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        const double v = phi_real(k, cand[i]);
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    if (!std::isfinite(fbest)) {
        if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
        throw PoleCollisionError("no admissible contour: kernel singular on the whole strip");
    }
    const double a = best > 0 ? cand[best - 1] : (std::isfinite(lo) ? lo + 1e-9 : cand[best] - 1.0);
    const double b = best + 1 < cand.size() ? cand[best + 1] : (std::isfinite(hi) ? hi - 1e-9 : cand[best] + 1.0);
    const double c = golden_min(k, a, b);
    return phi_real(k, c) <= fbest ? c : cand[best];
}

double sinh_scale(const GammaKernel& k, double c, double lo, double hi) {
    double d = std::min(c - lo, hi - c);
    if (!std::isfinite(d)) d = 2.0;
    const double eta = std::max(1e-6, std::min(0.05 * d, 0.01 * (1.0 + std::abs(c))));
    const double f0 = phi_real(k, c), fp = phi_real(k, c + eta), fm = phi_real(k, c - eta);
    double w = std::min(d, 2.0);
    const double curv = (fp - 2.0 * f0 + fm) / (eta * eta);
    if (std::isfinite(curv) && curv > 0.0) w = std::min(w, 1.0 / std::sqrt(curv));
    return std::max(w, 1e-9);
}

// (1/pi) int_0^inf Re K(c + i y) dy with y = w sinh t and trapezoid
// refinement in t.
Evaluation integrate_line(const GammaKernel& k, double c, double w, const QuadratureControl& ctl) {
    const double log_scale = k.log_eval({c, 0.0}).real();
    Evaluation ev;
    ev.contour = c;
    if (log_scale < kUnderflowLog) {
        // below the double range whatever the oscillation does
        ev.converged = true;
        return ev;
    }
    const double tol = ctl.target_rel_tol;
    auto f = [&](double y) {
        const cdouble lv = k.log_eval({c, y}) - log_scale;
        return lv.real() < -745.0 ? 0.0 : std::exp(lv).real();
    };
    auto mag = [&](double y) {
        const double lv = k.log_eval({c, y}).real() - log_scale;
        return lv < -745.0 ? 0.0 : std::exp(lv);
    };
    const double tail_thr = 1e-4 * tol;
    double Y = ctl.truncation_height;
    while (Y < 1e7 && (mag(Y) * (1.0 + Y) > tail_thr || mag(1.5 * Y) * (1.0 + Y) > tail_thr)) Y *= 2.0;

    const double tmax = std::asinh(Y / w);
    auto g = [&](double t) { return f(w * std::sinh(t)) * w * std::cosh(t); };

    std::size_t intervals = 16;
    double h = tmax / static_cast<double>(intervals);
    double sum = 0.5 * g(0.0) + 0.5 * g(tmax);
    for (std::size_t j = 1; j < intervals; ++j) sum += g(static_cast<double>(j) * h);
    std::size_t nodes = intervals + 1;
    double prev = h * sum / kPi;

    while (true) {
        double odd = 0.0;
        for (std::size_t j = 0; j < intervals; ++j) odd += g((static_cast<double>(j) + 0.5) * h);
        nodes += intervals;
        sum += odd;
        intervals *= 2;
        h *= 0.5;
        const double cur = h * sum / kPi;
        double err;
        if (cur == 0.0)
            err = prev == 0.0 ? 0.0 : kInf;
        else
            err = std::abs(cur - prev) / std::abs(cur);
        ev.est_error = err;
        prev = cur;
        if (intervals >= 64 && err <= tol) {
            ev.converged = true;
            break;
        }
        if (nodes + intervals > ctl.max_nodes) break;
    }
    ev.nodes = nodes;
    ev.value = prev * std::exp(log_scale);
    return ev;
}

void require_positive_z(double z) {
    if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("Fox-H argument must be positive and finite");
}

}  // namespace

cdouble ln_gamma_complex(cdouble z) {
    if (is_nonpositive_integer(z)) {
        std::ostringstream os;
        os << "ln_gamma_complex: pole at z = " << z.real();
        throw PoleError(os.str());
    }
    if (z.real() < 0.5) return kLnPi - log_sin_pi(z) - ln_gamma_right(1.0 - z);
    return ln_gamma_right(z);
}

double FoxHSpec::a_star() const noexcept {
    double a = 0.0;
    for (std::size_t j = 0; j < upper.size(); ++j) a += (j < n ? 1.0 : -1.0) * upper[j].weight;
    for (std::size_t j = 0; j < lower.size(); ++j) a += (j < m ? 1.0 : -1.0) * lower[j].weight;
    return a;
}

void FoxHSpec::validate() const {
    if (n > upper.size()) throw std::invalid_argument("FoxHSpec: n exceeds p");
    if (m > lower.size()) throw std::invalid_argument("FoxHSpec: m exceeds q");
    for (const auto& e : upper)
        if (!(e.weight > 0.0) || !std::isfinite(e.coef)) throw std::invalid_argument("FoxHSpec: upper weights must be positive");
    for (const auto& e : lower)
        if (!(e.weight > 0.0) || !std::isfinite(e.coef)) throw std::invalid_argument("FoxHSpec: lower weights must be positive");
    if (!(a_star() > 0.0)) throw std::invalid_argument("FoxHSpec: a* must be positive for a vertical contour");
}

void QuadratureControl::validate() const {
    if (!(target_rel_tol > 0.0 && target_rel_tol < 1.0)) throw std::invalid_argument("QuadratureControl: target_rel_tol must lie in (0, 1)");
    if (max_nodes < 64) throw std::invalid_argument("QuadratureControl: max_nodes must be >= 64");
    if (!(truncation_height > 0.0)) throw std::invalid_argument("QuadratureControl: truncation_height must be positive");
}

Evaluation fox_h_eval(const FoxHSpec& spec, double z, const QuadratureControl& ctl) {
    spec.validate();
    ctl.validate();
    require_positive_z(z);
    const GammaKernel k = kernel_of(spec, std::log(z));
    const double lo = k.left_bound(), hi = k.right_bound();
    if (!(lo < hi)) {
        std::ostringstream os;
        os << "fox_h: left poles reach " << lo << " but right poles start at " << hi;
        throw PoleCollisionError(os.str());
    }
    double c;
    if (ctl.contour_shift) {
        c = *ctl.contour_shift;
        if (!(c > lo && c < hi)) throw PoleCollisionError("fox_h: contour_shift outside the pole-free strip");
    } else {
        c = choose_contour(k, lo, hi);
    }
    return integrate_line(k, c, sinh_scale(k, c, lo, hi), ctl);
}

double fox_h(const FoxHSpec& spec, double z, const QuadratureControl& ctl) {
    const Evaluation ev = fox_h_eval(spec, z, ctl);
    if (!ev.converged) {
        std::ostringstream os;
        os << "fox_h: tolerance " << ctl.target_rel_tol << " not reached with " << ev.nodes
           << " nodes (estimate " << ev.est_error << ", z = " << z << ")";
        throw NonConvergenceError(os.str(), ev.est_error);
    }
    return ev.value;
}

Evaluation fox_h_on_strip(const FoxHSpec& spec, double z, double lo, double hi, const QuadratureControl& ctl) {
    spec.validate();
    ctl.validate();
    require_positive_z(z);
    if (!(lo < hi)) throw std::invalid_argument("fox_h_on_strip: empty strip");
    const GammaKernel k = kernel_of(spec, std::log(z));
    if (k.has_pole_in(lo, hi)) throw PoleCollisionError("fox_h_on_strip: kernel has a pole inside the strip");
    double c;
    if (ctl.contour_shift) {
        c = *ctl.contour_shift;
        if (!(c > lo && c < hi)) throw PoleCollisionError("fox_h_on_strip: contour_shift outside the strip");
    } else {
        c = choose_contour(k, lo, hi);
    }
    return integrate_line(k, c, sinh_scale(k, c, lo, hi), ctl);
}

FoxHSpec meijer_as_fox(std::size_t m, std::size_t n, std::span<const double> upper, std::span<const double> lower) {
    FoxHSpec s;
    s.m = m;
    s.n = n;
    for (double a : upper) s.upper.push_back({a, 1.0});
    for (double b : lower) s.lower.push_back({b, 1.0});
    return s;
}

double meijer_g(std::size_t m, std::size_t n, std::span<const double> upper, std::span<const double> lower, double z,
                const QuadratureControl& ctl) {
    return fox_h(meijer_as_fox(m, n, upper, lower), z, ctl);
}

// ---------------------------------------------------------------------------
// Bivariate

double BivariateFoxHSpec::a_star_first() const noexcept {
    double a = first.a_star();
    for (std::size_t j = 0; j < joint_upper.size(); ++j) a += (j < joint_n ? 1.0 : -1.0) * joint_upper[j].w1;
    for (const auto& t : joint_lower) a -= t.w1;
    return a;
}

double BivariateFoxHSpec::a_star_second() const noexcept {
    double a = second.a_star();
    for (std::size_t j = 0; j < joint_upper.size(); ++j) a += (j < joint_n ? 1.0 : -1.0) * joint_upper[j].w2;
    for (const auto& t : joint_lower) a -= t.w2;
    return a;
}

void BivariateFoxHSpec::validate() const {
    if (joint_n > joint_upper.size()) throw std::invalid_argument("BivariateFoxHSpec: joint_n exceeds joint group size");
    auto check = [](const JointTriple& t) {
        if (!(t.w1 >= 0.0 && t.w2 >= 0.0) || !std::isfinite(t.coef))
            throw std::invalid_argument("BivariateFoxHSpec: joint weights must be non-negative");
    };
    for (const auto& t : joint_upper) check(t);
    for (const auto& t : joint_lower) check(t);
    for (const auto* blk : {&first, &second}) {
        if (blk->n > blk->upper.size() || blk->m > blk->lower.size())
            throw std::invalid_argument("BivariateFoxHSpec: marginal block indices out of range");
        for (const auto& e : blk->upper)
            if (!(e.weight > 0.0)) throw std::invalid_argument("BivariateFoxHSpec: marginal weights must be positive");
        for (const auto& e : blk->lower)
            if (!(e.weight > 0.0)) throw std::invalid_argument("BivariateFoxHSpec: marginal weights must be positive");
    }
    if (!(a_star_first() > 0.0) || !(a_star_second() > 0.0))
        throw std::invalid_argument("BivariateFoxHSpec: convergence exponents must be positive");
}

namespace {

struct JointGamma {
    double coef;
    double s1;
    double s2;
    bool numerator;
};

struct BivariateKernel {
    GammaKernel u;
    GammaKernel v;
    std::vector<JointGamma> joint;

    cdouble log_joint(cdouble a, cdouble b) const {
        cdouble acc = 0.0;
        for (const auto& j : joint) {
            const cdouble arg = j.coef + j.s1 * a + j.s2 * b;
            if (j.numerator) {
                acc += ln_gamma_mod(arg);
            } else {
                const cdouble r = ln_recip_gamma(arg);
                if (std::isinf(r.real())) return {-kInf, 0.0};
                acc += r;
            }
        }
        return acc;
    }

    // Smallest slack of the joint numerator pole constraints at (cu, cv),
    // measured along the Re u axis and Re v axis.
    double joint_slack(double cu, double cv) const {
        double d = kInf;
        for (const auto& j : joint) {
            if (!j.numerator) continue;
            const double a = j.coef + j.s1 * cu + j.s2 * cv;
            if (a <= 0.0) return -1.0;
            const double rate = std::abs(j.s1) + std::abs(j.s2);
            if (rate > 0.0) d = std::min(d, a / rate);
        }
        return d;
    }

    double phi(double cu, double cv) const {
        if (u.singular_distance(cu) < 1e-7 || v.singular_distance(cv) < 1e-7) return kInf;
        const double val = (u.log_eval({cu, 0.0}) + v.log_eval({cv, 0.0}) + log_joint({cu, 0.0}, {cv, 0.0})).real();
        return std::isfinite(val) ? val : kInf;
    }
};

std::pair<double, double> finite_window(double lo, double hi) {
    if (std::isfinite(lo) && std::isfinite(hi)) return {lo, hi};
    if (std::isfinite(lo)) return {lo, lo + 30.0};
    if (std::isfinite(hi)) return {hi - 30.0, hi};
    return {-15.0, 15.0};
}

double decay_height(const GammaKernel& k, double c, double tol, double start) {
    const double base = k.log_eval({c, 0.0}).real();
    const double thr = std::log(1e-4 * tol);
    double Y = start;
    while (Y < 1e5 && (k.log_eval({c, Y}).real() - base + std::log1p(Y) > thr ||
                       k.log_eval({c, -Y}).real() - base + std::log1p(Y) > thr))
        Y *= 1.5;
    return Y;
}

}  // namespace

Evaluation fox_h_bivariate_eval(const BivariateFoxHSpec& spec, double x, double y, const QuadratureControl& ctl) {
    spec.validate();
    ctl.validate();
    require_positive_z(x);
    require_positive_z(y);

    BivariateKernel K{kernel_of(spec.first, std::log(x)), kernel_of(spec.second, std::log(y)), {}};
    for (std::size_t j = 0; j < spec.joint_upper.size(); ++j) {
        const auto& t = spec.joint_upper[j];
        if (j < spec.joint_n)
            K.joint.push_back({1.0 - t.coef, -t.w1, -t.w2, true});
        else
            K.joint.push_back({t.coef, t.w1, t.w2, false});
    }
    for (const auto& t : spec.joint_lower) K.joint.push_back({1.0 - t.coef, -t.w1, -t.w2, false});

    const double Lu = K.u.left_bound(), Ru = K.u.right_bound();
    const double Lv = K.v.left_bound(), Rv = K.v.right_bound();
    if (!(Lu < Ru) || !(Lv < Rv)) throw PoleCollisionError("fox_h_bivariate: marginal pole families overlap");

    // Contour pair: minimize the real-axis integrand magnitude over a grid of
    // the feasible region, keeping a margin from every pole family.
    const auto [ulo, uhi] = finite_window(Lu, Ru);
    const auto [vlo, vhi] = finite_window(Lv, Rv);
    const double margin = 0.1 * std::min({1.0, uhi - ulo, vhi - vlo});
    constexpr int kGrid = 28;
    double best = kInf, cu = 0.0, cv = 0.0, du = 0.0, dv = 0.0;
    for (int i = 1; i < kGrid; ++i) {
        const double a = ulo + (uhi - ulo) * i / kGrid;
        const double dua = std::min(a - Lu, Ru - a);
        if (dua < margin) continue;
        for (int j = 1; j < kGrid; ++j) {
            const double b = vlo + (vhi - vlo) * j / kGrid;
            const double dvb = std::min(b - Lv, Rv - b);
            const double js = K.joint_slack(a, b);
            if (dvb < margin || js < margin) continue;
            const double val = K.phi(a, b);
            if (val < best) {
                best = val;
                cu = a;
                cv = b;
                du = std::min(dua, js);
                dv = std::min(dvb, js);
            }
        }
    }
    if (!std::isfinite(best)) throw PoleCollisionError("fox_h_bivariate: no separating contour pair");

    const double tol = 10.0 * ctl.target_rel_tol;
    const double Yu = decay_height(K.u, cu, tol, std::min(ctl.truncation_height, 8.0));
    const double Yv = decay_height(K.v, cv, tol, std::min(ctl.truncation_height, 8.0));
    double ratio = 0.0;
    for (const auto& j : K.joint)
        if (j.s2 != 0.0) ratio = std::max(ratio, std::abs(j.s1 / j.s2));
    const double Vspan = Yv + ratio * Yu;
    const bool joint_den = std::any_of(K.joint.begin(), K.joint.end(), [](const JointGamma& j) { return !j.numerator; });

    const double log_scale = best;
    double hu = std::min(0.5 * std::min(du, 1.0), 0.25);
    double hv = std::min(0.5 * std::min(dv, 1.0), 0.25);

    auto evaluate = [&](double hu_, double hv_, std::size_t& nodes) {
        const auto nv = static_cast<long>(std::ceil(Vspan / hv_));
        std::vector<cdouble> lv(static_cast<std::size_t>(2 * nv + 1));
        for (long k = -nv; k <= nv; ++k) lv[static_cast<std::size_t>(k + nv)] = K.v.log_eval({cv, k * hv_});
        const auto nu = static_cast<long>(std::ceil(Yu / hu_));
        const double skip = std::log(1e-3 * tol) - 40.0;
        const double joint_peak = K.log_joint({cu, 0.0}, {cv, 0.0}).real();
        double total = 0.0;
        for (long i = 0; i <= nu; ++i) {
            const cdouble u(cu, i * hu_);
            const cdouble lu = K.u.log_eval(u);
            if (!std::isfinite(lu.real())) continue;
            cdouble inner = 0.0;
            for (long k = -nv; k <= nv; ++k) {
                const cdouble& lvk = lv[static_cast<std::size_t>(k + nv)];
                if (!std::isfinite(lvk.real())) continue;
                if (!joint_den) {
                    // |Gamma(a + i b)| <= Gamma(a) for a > 0 bounds the joint factor
                    const double bound = lu.real() + lvk.real() + joint_peak - log_scale;
                    if (bound < skip) continue;
                }
                const cdouble v(cv, k * hv_);
                const cdouble lt = lu + lvk + K.log_joint(u, v) - log_scale;
                ++nodes;
                if (lt.real() < -745.0) continue;
                inner += std::exp(lt);
            }
            const double wgt = (i == 0) ? 0.5 : 1.0;
            total += wgt * inner.real();
        }
        // (1/(2 pi))^2 over the full (yu, yv) plane; the outer half-line is doubled.
        return total * hu_ * hv_ / (2.0 * kPi * kPi);
    };

    Evaluation ev;
    ev.contour = cu;
    std::size_t nodes = 0;
    double prev = evaluate(hu, hv, nodes);
    const std::size_t budget = ctl.max_nodes * ctl.max_nodes;
    for (int level = 0; level < 8; ++level) {
        hu *= 0.5;
        hv *= 0.5;
        const double cur = evaluate(hu, hv, nodes);
        ev.est_error = cur == 0.0 ? (prev == 0.0 ? 0.0 : kInf) : std::abs(cur - prev) / std::abs(cur);
        prev = cur;
        if (ev.est_error <= tol) {
            ev.converged = true;
            break;
        }
        if (nodes > budget) break;
    }
    ev.nodes = nodes;
    ev.value = prev * std::exp(log_scale);
    return ev;
}

double fox_h_bivariate(const BivariateFoxHSpec& spec, double x, double y, const QuadratureControl& ctl) {
    const Evaluation ev = fox_h_bivariate_eval(spec, x, y, ctl);
    if (!ev.converged) {
        std::ostringstream os;
        os << "fox_h_bivariate: tolerance " << 10.0 * ctl.target_rel_tol << " not reached (estimate " << ev.est_error
           << ")";
        throw NonConvergenceError(os.str(), ev.est_error);
    }
    return ev.value;
}

}  // namespace mixedfso::specfun
