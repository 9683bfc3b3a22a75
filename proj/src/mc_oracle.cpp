#include "mixedfso/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace mixedfso::mc {

namespace {

constexpr std::int64_t kMinTrials = 1000;
constexpr std::int64_t kReliableEvents = 50;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{lo32(seed), hi32(seed), lo32(stream_id), hi32(stream_id)};
    return std::mt19937_64(seq);
}

void require_trials(std::int64_t trials) {
    if (trials < kMinTrials) throw std::invalid_argument("Monte Carlo needs at least 1000 trials");
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded(seed, stream_id)) {}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

void McOptions::validate() const {
    if (substreams < 1) throw std::invalid_argument("substreams must be >= 1");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

double sample_malaga_turbulence(const MalagaFsoLink& link, RngStream& rng) {
    const auto& w = link.weights();
    double u = rng.uniform(), acc = 0.0;
    int k = link.beta();
    for (int i = 0; i < link.beta(); ++i) {
        acc += w[i];
        if (u < acc) {
            k = i + 1;
            break;
        }
    }
    return link.scale() * rng.gamma(link.alpha()) * rng.gamma(static_cast<double>(k));
}

double sample_pointing_loss(const MalagaFsoLink& link, RngStream& rng) {
    return link.a0() * std::pow(rng.uniform(), 1.0 / link.xi_sq());
}

double sample_malaga_irradiance(const MalagaFsoLink& link, RngStream& rng) {
    const double ia = sample_malaga_turbulence(link, rng);
    return ia * sample_pointing_loss(link, rng);
}

double sample_fso_snr(const MalagaFsoLink& link, RngStream& rng) {
    const double mean_i = link.a0() * link.h() * (link.g() + link.omega());
    return link.mu_r() * std::pow(sample_malaga_irradiance(link, rng) / mean_i, link.r());
}

double sample_rf_snr(const KappaMuShadowedLink& link, RngStream& rng) {
    const int mu = link.mu();
    const double kappa = link.kappa(), m = link.m();
    const double sigma = std::sqrt(0.5 / (mu * (1.0 + kappa)));
    const double p = std::sqrt(kappa / ((1.0 + kappa) * mu));
    const double zeta = std::sqrt(rng.gamma(m) / m);
    double w = 0.0;
    for (int i = 0; i < mu; ++i) {
        const double x = sigma * rng.normal() + zeta * p;
        const double y = sigma * rng.normal();
        w += x * x + y * y;
    }
    return link.avg_snr() * w;
}

double sample_end_to_end_snr(const Scenario& sc, RngStream& rng) {
    const double g1 = sample_fso_snr(sc.fso, rng);
    const double g2 = sample_rf_snr(sc.rf, rng);
    return g1 * g2 / (g1 + g2 + 1.0);
}

McEstimate estimate_mean(std::int64_t trials, const McOptions& opt, const std::function<double(RngStream&)>& sample) {
    opt.validate();
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    const int ns = opt.substreams;
    std::vector<Accumulator> acc(ns);
    auto run = [&](int j) {
        const std::int64_t n = trials / ns + (j < trials % ns ? 1 : 0);
        RngStream rng(opt.seed, static_cast<std::uint64_t>(j));
        Accumulator a;
        for (std::int64_t i = 0; i < n; ++i) a.add(sample(rng));
        acc[j] = a;
    };
    const int workers = std::min(opt.workers, ns);
    if (workers == 1) {
        for (int j = 0; j < ns; ++j) run(j);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int j = t; j < ns; j += workers) run(j);
            });
        for (auto& th : pool) th.join();
    }
    Accumulator total;
    for (const auto& a : acc) total.merge(a);

    McEstimate est;
    est.trials = total.count;
    est.mean = total.sum / total.count;
    const double var = std::max(0.0, (total.sumsq - total.sum * est.mean) / std::max<std::int64_t>(total.count - 1, 1));
    est.std_error = std::sqrt(var / total.count);
    est.elapsed = std::chrono::steady_clock::now() - t0;
    return est;
}

McEstimate estimate_outage(const Scenario& sc, std::int64_t trials, const McOptions& opt) {
    if (!(sc.gamma_th >= 0.0) || !std::isfinite(sc.gamma_th)) throw std::invalid_argument("gamma_th must be non-negative");
    require_trials(trials);
    const double th = sc.gamma_th;
    McEstimate est = estimate_mean(trials, opt, [&](RngStream& rng) { return sample_end_to_end_snr(sc, rng) < th ? 1.0 : 0.0; });
    est.unreliable = std::llround(est.mean * est.trials) < kReliableEvents;
    return est;
}

McEstimate estimate_capacity(const Scenario& sc, std::int64_t trials, const McOptions& opt) {
    require_trials(trials);
    return estimate_mean(trials, opt,
                         [&](RngStream& rng) { return std::log1p(sample_end_to_end_snr(sc, rng)) / (2.0 * std::numbers::ln2); });
}

}  // namespace mixedfso::mc
