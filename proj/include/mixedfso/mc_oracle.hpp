#pragma once

// Monte Carlo estimates of outage and capacity from physical sampling of
// both hops and the AF end-to-end SNR combiner.

#include "mixedfso/channel_models.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>

namespace mixedfso::mc {

/// Reproducible random stream; identical (seed, stream_id) give identical
/// sequences.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    double uniform();
    double normal();
    /// Gamma(shape, scale = 1).
    double gamma(double shape);

private:
    std::uint64_t seed_, stream_id_;
    std::mt19937_64 engine_;
};

/// Running (count, sum, sum of squares) for one substream.
struct Accumulator {
    std::int64_t count = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) noexcept {
        ++count;
        sum += x;
        sumsq += x * x;
    }
    void merge(const Accumulator& o) noexcept {
        count += o.count;
        sum += o.sum;
        sumsq += o.sumsq;
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
    std::chrono::duration<double> elapsed{0.0};
    /// Outage only: fewer than 50 outage events were observed.
    bool unreliable = false;
};

struct McOptions {
    std::uint64_t seed = 1;
    /// Trials are split over this many substreams regardless of `workers`,
    /// so the estimate does not depend on the thread count.
    int substreams = 64;
    int workers = 1;

    void validate() const;
};

/// I = I_a I_p: Generalized-K mixture times the pointing loss A0 U^{1/xi^2}.
double sample_malaga_irradiance(const MalagaFsoLink& link, RngStream& rng);
/// Turbulence part I_a only.
double sample_malaga_turbulence(const MalagaFsoLink& link, RngStream& rng);
/// Pointing-loss part I_p only.
double sample_pointing_loss(const MalagaFsoLink& link, RngStream& rng);
/// (A0 h (g + Omega))^{-r} mu_r I^r.
double sample_fso_snr(const MalagaFsoLink& link, RngStream& rng);
/// gamma_bar_2 W, W built from mu clusters with Nakagami-m shadowed dominant
/// components, E[W] = 1.
double sample_rf_snr(const KappaMuShadowedLink& link, RngStream& rng);
/// gamma_1 gamma_2 / (gamma_1 + gamma_2 + 1).
double sample_end_to_end_snr(const Scenario& sc, RngStream& rng);

/// Mean of `sample` over `trials` draws split into opt.substreams substreams
/// (stream ids 0..substreams-1), merged in substream order.
McEstimate estimate_mean(std::int64_t trials, const McOptions& opt,
                         const std::function<double(RngStream&)>& sample);

/// Fraction of trials with end-to-end SNR below sc.gamma_th.
McEstimate estimate_outage(const Scenario& sc, std::int64_t trials, const McOptions& opt = {});
/// Mean of ln(1 + gamma) / (2 ln 2).
McEstimate estimate_capacity(const Scenario& sc, std::int64_t trials, const McOptions& opt = {});

}  // namespace mixedfso::mc
