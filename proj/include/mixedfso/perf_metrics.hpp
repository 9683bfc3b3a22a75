#pragma once

// Ergodic capacity, outage probability and diversity order of the dual-hop
// AF mixed FSO/RF link.

#include "mixedfso/channel_models.hpp"
#include "mixedfso/specfun.hpp"

#include <functional>
#include <stdexcept>

namespace mixedfso {

/// Requested closed form does not exist for this regime; the message names
/// the path to use instead.
class NotImplementedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Truncated outage series left [0, 1]; the value is not clamped.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, double value) : std::runtime_error(what), value_(value) {}
    double value() const noexcept { return value_; }

private:
    double value_;
};

enum class CapacityMethod { exact_closed_form, quadrature, asymptotic };

struct CapacityResult {
    /// Bits per channel use, including the 1/(2 ln 2) pre-log.
    double value = 0.0;
    CapacityMethod method = CapacityMethod::exact_closed_form;
    double est_error = 0.0;
};

enum class OutageMethod { exact_series, asymptotic, special_case_gg, quadrature, numeric_fallback };

struct OutageResult {
    double value = 0.0;
    OutageMethod method = OutageMethod::exact_series;
    int q_used = 0;
    int l_used = 0;
    /// Magnitude of the outermost (q = q_max or l = l_max) shell of the series.
    double tail_estimate = 0.0;
    /// tail_estimate > 1e-3 * value.
    bool truncation_warning = false;
};

enum class BindingTerm { mu, xi_sq_over_r, alpha_over_r, beta_over_r };

struct DiversityReport {
    /// min{mu, xi^2/r, alpha/r, beta/r}.
    double G_d = 0.0;
    BindingTerm binding_term = BindingTerm::mu;
    /// From P_out ~ (G_c SNR)^{-G_d} at two high-SNR asymptotic points,
    /// SNR being the heterodyne FSO SNR with both hops scaled together.
    double G_c = 0.0;
    /// Log-log slope between the two fit points.
    double fitted_slope = 0.0;
    /// min{mu, xi^2/r, alpha/r, k_min/r}, k_min the smallest Malaga mixture
    /// index with non-zero weight (the extreme-SNR decay of the series).
    double tail_slope = 0.0;
};

/// Default tolerances of the Fox-H calls made by each metric.
specfun::QuadratureControl capacity_control();
specfun::QuadratureControl outage_control();

/// T(x, y, z) = int_0^inf s^y e^{-s} H_k(mu_r s / B^r) Gamma(z) (1 + x s)^{-z} ds
/// as a bivariate Fox-H value; H_k is the FSO CMGF block of mixture index k.
specfun::Evaluation capacity_kernel_t(const MalagaFsoLink& fso, int k, double x, int y, int z,
                                      const specfun::QuadratureControl& ctl = capacity_control());

CapacityResult ergodic_capacity_exact(const Scenario& sc, const specfun::QuadratureControl& ctl = capacity_control());
CapacityResult ergodic_capacity_quadrature(const Scenario& sc, const specfun::QuadratureControl& ctl = capacity_control());
/// (1 / (2 ln 2)) int_0^inf s e^{-s} M1(s) M2(s) ds for arbitrary CMGFs.
CapacityResult capacity_from_cmgfs(const std::function<double(double)>& cmgf1,
                                   const std::function<double(double)>& cmgf2, double tol = 1e-9);
/// Large-gamma_2 expansion; m >= mu only (NotImplementedError otherwise).
CapacityResult ergodic_capacity_asymptotic(const Scenario& sc, const specfun::QuadratureControl& ctl = capacity_control());

/// Truncated double series with orders (sc.q_max, sc.l_max).
OutageResult outage_exact(const Scenario& sc, const specfun::QuadratureControl& ctl = outage_control());
/// Direct numerical integration over the FSO SNR density.
OutageResult outage_quadrature(const Scenario& sc, const specfun::QuadratureControl& ctl = outage_control());
/// Leading residues of the q = l = 0 terms (m >= mu). For m < mu the exact
/// series is returned with method numeric_fallback.
OutageResult outage_asymptotic(const Scenario& sc, const specfun::QuadratureControl& ctl = outage_control());
/// Gamma-Gamma / Nakagami-m reduction; requires mu = m, kappa <= 1e-6,
/// g <= 1e-6 and Omega = 1.
OutageResult outage_gg_nakagami_asymptotic(const Scenario& sc);

DiversityReport diversity_order(const Scenario& sc);

/// Both hops rescaled: FSO heterodyne SNR and RF average SNR.
Scenario with_snrs(const Scenario& sc, double fso_avg_snr, double rf_avg_snr);

}  // namespace mixedfso
