#pragma once

// Hop models of the mixed FSO/RF relay: Malaga-M irradiance with pointing
// errors on the optical hop, kappa-mu shadowed fading on the RF hop.

#include "mixedfso/specfun.hpp"

#include <vector>

namespace mixedfso {

enum class Detection { heterodyne = 1, imdd = 2 };

/// Malaga-M turbulence with pointing errors. Immutable; derived constants
/// are computed once at construction.
class MalagaFsoLink {
public:
    /// avg_snr is the heterodyne electrical SNR mu_1 (linear scale).
    MalagaFsoLink(double alpha, int beta, double g, double omega, double xi, double a0, Detection detection,
                  double avg_snr);

    /// Gamma-Gamma reduction (g = 1e-6, Omega = 1).
    static MalagaFsoLink gamma_gamma(double alpha, int beta, double xi, double a0, Detection detection,
                                     double avg_snr);
    /// K-distribution reduction (beta = 1).
    static MalagaFsoLink k_distribution(double alpha, double g, double omega, double xi, double a0,
                                        Detection detection, double avg_snr);

    MalagaFsoLink with_avg_snr(double avg_snr) const;

    double alpha() const noexcept { return alpha_; }
    int beta() const noexcept { return beta_; }
    double g() const noexcept { return g_; }
    double omega() const noexcept { return omega_; }
    double xi() const noexcept { return xi_; }
    double xi_sq() const noexcept { return xi_ * xi_; }
    double a0() const noexcept { return a0_; }
    Detection detection() const noexcept { return detection_; }
    int r() const noexcept { return static_cast<int>(detection_); }
    double avg_snr() const noexcept { return avg_snr_; }

    /// xi^2 / (xi^2 + 1).
    double h() const noexcept { return h_; }
    /// alpha beta h (g + Omega) / (g beta + Omega).
    double big_b() const noexcept { return big_b_; }
    /// (g beta + Omega) / (alpha beta), the scale of the Generalized-K factors.
    double scale() const noexcept { return scale_; }
    /// Electrical SNR mu_r.
    double mu_r() const noexcept { return mu_r_; }
    /// ln A and ln b_k (k = 1..beta); -inf where b_k = 0.
    double log_a() const noexcept { return log_a_; }
    const std::vector<double>& log_b() const noexcept { return log_b_; }
    /// Mixture weights w_k = A b_k; they sum to one.
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    double alpha_, g_, omega_, xi_, a0_, avg_snr_;
    int beta_;
    Detection detection_;
    double h_, big_b_, scale_, mu_r_, log_a_;
    std::vector<double> log_b_;
    std::vector<double> weights_;
};

/// kappa-mu shadowed fading with integer mu and m.
class KappaMuShadowedLink {
public:
    KappaMuShadowedLink(double kappa, int mu, int m, double avg_snr);

    /// Nakagami-m reduction (kappa = 1e-8, mu = m).
    static KappaMuShadowedLink nakagami(int m, double avg_snr);
    /// Rayleigh reduction (kappa = 1e-8, mu = m = 1).
    static KappaMuShadowedLink rayleigh(double avg_snr);

    KappaMuShadowedLink with_avg_snr(double avg_snr) const;

    double kappa() const noexcept { return kappa_; }
    int mu() const noexcept { return mu_; }
    int m() const noexcept { return m_; }
    double avg_snr() const noexcept { return avg_snr_; }
    double theta1() const noexcept { return theta1_; }
    double theta2() const noexcept { return theta2_; }

private:
    double kappa_;
    int mu_, m_;
    double avg_snr_, theta1_, theta2_;
};

struct Scenario {
    MalagaFsoLink fso;
    KappaMuShadowedLink rf;
    double gamma_th = 1.0;
    int q_max = 10;
    int l_max = 5;

    void validate() const;
};

enum class RfRegime { m_ge_mu, m_lt_mu };

struct RfSeriesCoeffs {
    RfRegime regime = RfRegime::m_ge_mu;
    /// chi_l, l = 1..m (index l-1).
    std::vector<double> chi;
    /// Delta_{1i}, i = 1..mu-m.
    std::vector<double> delta1;
    /// Delta_{2i}, i = 1..m.
    std::vector<double> delta2;
    /// Upsilon_i, i = 0..m-mu.
    std::vector<double> upsilon;
};

/// One Gamma(shape, scale) component of the RF SNR law; weights may be
/// negative in the m < mu regime but always sum to one.
struct GammaComponent {
    double weight;
    int shape;
    double scale;
};

double electrical_snr(const MalagaFsoLink& link);

double fso_irradiance_pdf(const MalagaFsoLink& link, double x, const specfun::QuadratureControl& ctl = {});
double fso_snr_ccdf(const MalagaFsoLink& link, double x, const specfun::QuadratureControl& ctl = {});
/// P[gamma_1 <= x], evaluated directly (no 1 - CCDF cancellation).
double fso_snr_cdf(const MalagaFsoLink& link, double x, const specfun::QuadratureControl& ctl = {});
double fso_snr_pdf(const MalagaFsoLink& link, double x, const specfun::QuadratureControl& ctl = {});
double fso_cmgf(const MalagaFsoLink& link, double s, const specfun::QuadratureControl& ctl = {});
/// E[gamma_1].
double fso_snr_mean(const MalagaFsoLink& link);

/// Fox-H blocks used by the closed forms; k is the Malaga mixture index.
specfun::FoxHSpec fso_pdf_spec(const MalagaFsoLink& link, int k);
specfun::FoxHSpec fso_cmgf_spec(const MalagaFsoLink& link, int k);
/// xi^2 / (Gamma(alpha) Gamma(k)) w_k.
double fso_component_coef(const MalagaFsoLink& link, int k);

double rf_snr_pdf(const KappaMuShadowedLink& link, double x);
double rf_mgf(const KappaMuShadowedLink& link, double s);
RfSeriesCoeffs rf_series_coeffs(const KappaMuShadowedLink& link);
std::vector<GammaComponent> rf_gamma_components(const KappaMuShadowedLink& link);
double rf_cmgf(const KappaMuShadowedLink& link, double s);
double rf_snr_ccdf(const KappaMuShadowedLink& link, double x);
double rf_snr_cdf(const KappaMuShadowedLink& link, double x);

}  // namespace mixedfso
