#pragma once

// Gamma-kernel special functions evaluated by Mellin-Barnes contour
// quadrature: complex log-gamma, univariate Fox-H, Meijer-G and the
// bivariate Fox-H in the two-variable (Mittal-Gupta) layout.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixedfso::specfun {

using cdouble = std::complex<double>;

class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// No vertical line separates the left and right pole families.
class PoleCollisionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double est_error)
        : std::runtime_error(what), est_error_(est_error) {}
    double est_error() const noexcept { return est_error_; }

private:
    double est_error_;
};

/// ln Gamma(z). exp() of the result equals Gamma(z); for Re z > 0 the
/// imaginary part follows the analytic log-gamma branch (continuous in z).
/// Throws PoleError at non-positive integers.
cdouble ln_gamma_complex(cdouble z);

/// (coefficient, weight) of one Gamma(coef + weight * s) factor.
struct ParamPair {
    double coef = 0.0;
    double weight = 1.0;
};

/// H^{m,n}_{p,q}[z | (a_j, A_j); (b_j, B_j)].
///
/// The kernel is
///   prod_{j<m} Gamma(b_j + B_j s) prod_{j<n} Gamma(1 - a_j - A_j s)
///   / ( prod_{j>=m} Gamma(1 - b_j - B_j s) prod_{j>=n} Gamma(a_j + A_j s) )
/// integrated against z^{-s} ds / (2 pi i).
struct FoxHSpec {
    std::vector<ParamPair> upper;
    std::vector<ParamPair> lower;
    std::size_t n = 0;
    std::size_t m = 0;

    std::size_t p() const noexcept { return upper.size(); }
    std::size_t q() const noexcept { return lower.size(); }

    /// Sum of |weights| of numerator gammas minus denominator gammas; the
    /// kernel decays like exp(-pi a* |Im s| / 2) along a vertical line.
    double a_star() const noexcept;

    /// Throws std::invalid_argument for bad indices or weights and for
    /// a* <= 0 (vertical line integral not absolutely convergent).
    void validate() const;
};

struct QuadratureControl {
    double target_rel_tol = 1e-8;
    std::size_t max_nodes = 1u << 17;
    /// Fixed Re(s) of the contour; chosen automatically when empty.
    std::optional<double> contour_shift;
    /// Initial |Im s| cutoff; doubled until the kernel tail is negligible.
    double truncation_height = 32.0;

    void validate() const;
};

struct Evaluation {
    double value = 0.0;
    /// |I(2N) - I(N)| / |I(2N)| from the last refinement.
    double est_error = 0.0;
    std::size_t nodes = 0;
    double contour = 0.0;
    bool converged = false;
};

/// Contour quadrature with the error estimate; does not throw on
/// non-convergence (check Evaluation::converged).
Evaluation fox_h_eval(const FoxHSpec& spec, double z, const QuadratureControl& ctl = {});

/// Fox-H value; throws NonConvergenceError when the tolerance is not met
/// within ctl.max_nodes, PoleCollisionError when no separating line exists.
double fox_h(const FoxHSpec& spec, double z, const QuadratureControl& ctl = {});

/// Integral of the same kernel along a vertical line placed inside the
/// caller-supplied strip lo < Re s < hi instead of between the pole
/// families. Used where the contour is inherited from an outer integral
/// (the families may then overlap). The strip must be pole free.
Evaluation fox_h_on_strip(const FoxHSpec& spec, double z, double lo, double hi,
                          const QuadratureControl& ctl = {});

/// G^{m,n}_{p,q}(z) as the Fox-H reduction with all weights equal to one.
double meijer_g(std::size_t m, std::size_t n, std::span<const double> upper,
                std::span<const double> lower, double z, const QuadratureControl& ctl = {});

FoxHSpec meijer_as_fox(std::size_t m, std::size_t n, std::span<const double> upper,
                       std::span<const double> lower);

/// Coefficient and the weights on the two Mellin variables.
struct JointTriple {
    double coef = 0.0;
    double w1 = 1.0;
    double w2 = 1.0;
};

/// Bivariate Fox-H. The joint block contributes
///   prod_{j<joint_n} Gamma(1 - a_j - w1 u - w2 v)
///   / ( prod_{j>=joint_n} Gamma(a_j + w1 u + w2 v) prod_j Gamma(1 - b_j - w1 u - w2 v) )
/// and `first`/`second` are ordinary Fox-H kernels in u and v. The first
/// argument x pairs with u (block `first`), the second y with v.
struct BivariateFoxHSpec {
    std::vector<JointTriple> joint_upper;
    std::size_t joint_n = 0;
    std::vector<JointTriple> joint_lower;
    FoxHSpec first;
    FoxHSpec second;

    /// Decay exponents along u and v; both must be positive.
    double a_star_first() const noexcept;
    double a_star_second() const noexcept;
    void validate() const;
};

Evaluation fox_h_bivariate_eval(const BivariateFoxHSpec& spec, double x, double y,
                                const QuadratureControl& ctl = {});
double fox_h_bivariate(const BivariateFoxHSpec& spec, double x, double y,
                       const QuadratureControl& ctl = {});

}  // namespace mixedfso::specfun
