#include "pcsisac/air.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pcsisac/parallel.hpp"

namespace pcsisac {

namespace {

constexpr std::size_t kChunk = 4096;

struct ChunkSums {
    double sum = 0.0;
    double sum_sq = 0.0;
};

}  // namespace

void AirConfig::validate() const {
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw std::invalid_argument("air: noise variance must be positive");
    if (mc_trials == 0) throw std::invalid_argument("air: need at least one Monte-Carlo trial");
}

AirEstimate air_mc(const Constellation& c, const AirConfig& cfg) {
    cfg.validate();
    const double s2 = cfg.noise_variance;
    const auto pts = c.points();
    const auto probs = c.probs();

    std::vector<cdouble> support;
    std::vector<double> log_prior;
    for (std::size_t q = 0; q < c.size(); ++q) {
        if (probs[q] <= 0.0) continue;
        support.push_back(pts[q]);
        log_prior.push_back(std::log(probs[q]));
    }
    const double log_norm = std::log(std::numbers::pi * s2);

    const std::size_t chunks = (cfg.mc_trials + kChunk - 1) / kChunk;
    std::vector<ChunkSums> partial(chunks);
    parallel_for(chunks, cfg.threads, [&](std::size_t ci) {
        auto gen = make_stream(cfg.seed, StreamTag::air, ci);
        const std::size_t begin = ci * kChunk;
        const std::size_t end = std::min(cfg.mc_trials, begin + kChunk);
        const auto x = sample_symbols(c, end - begin, gen);
        std::vector<double> expo(support.size());
        ChunkSums acc;
        for (const auto& xk : x) {
            const cdouble y = xk + complex_gaussian(gen, s2);
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t q = 0; q < support.size(); ++q) {
                expo[q] = log_prior[q] - std::norm(y - support[q]) / s2;
                top = std::max(top, expo[q]);
            }
            double z = 0.0;
            for (double e : expo) z += std::exp(e - top);
            // -log2 p_Y(y)
            const double h = -(top + std::log(z) - log_norm) / std::numbers::ln2;
            acc.sum += h;
            acc.sum_sq += h * h;
        }
        partial[ci] = acc;
    });

    ChunkSums total;
    for (const auto& p : partial) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
    }
    const auto n = static_cast<double>(cfg.mc_trials);
    const double mean = total.sum / n;
    const double var = n > 1 ? std::max(0.0, (total.sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    const double h_given_x = std::log2(std::numbers::pi * std::numbers::e * s2);
    return {mean - h_given_x, std::sqrt(var / n)};
}

std::vector<AirC0Point> air_vs_c0(const Constellation& base, std::span<const double> c0_grid,
                                  const AirConfig& cfg) {
    const auto solutions = sweep_c0(amplitudes(base), c0_grid, TieBreak::max_entropy);
    std::vector<AirC0Point> out;
    out.reserve(solutions.size());
    for (const auto& sol : solutions) {
        out.push_back({sol.c0, air_mc(shaped(base, sol), cfg), sol.achieved_m4, sol.gap, sol.entropy_bits});
    }
    return out;
}

std::vector<std::vector<AirSnrPoint>> air_vs_snr(std::span<const Constellation> constellations,
                                                 std::span<const double> snr_grid_db, const AirConfig& cfg) {
    if (snr_grid_db.empty()) throw std::invalid_argument("air_vs_snr: empty SNR grid");
    std::vector<std::vector<AirSnrPoint>> out;
    for (const auto& c : constellations) {
        std::vector<AirSnrPoint> series;
        for (double snr : snr_grid_db) {
            AirConfig point_cfg = cfg;
            point_cfg.noise_variance = std::pow(10.0, -snr / 10.0);
            series.push_back({snr, point_cfg.noise_variance, air_mc(c, point_cfg)});
        }
        out.push_back(std::move(series));
    }
    return out;
}

}  // namespace pcsisac
