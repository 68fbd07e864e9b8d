#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcsisac/constellation.hpp"

namespace pcsisac {

/// Single-symbol OFDM parameters. The symbol duration is derived as 1/spacing,
/// which keeps the subcarriers orthogonal over the rectangular window.
struct OfdmConfig {
    std::size_t num_subcarriers = 64;
    double subcarrier_spacing = 100e6 / 64;  // Hz
    std::size_t oversampling = 4;

    static OfdmConfig from_bandwidth(double bandwidth_hz, std::size_t num_subcarriers,
                                     std::size_t oversampling = 4);

    double symbol_duration() const { return 1.0 / subcarrier_spacing; }
    double bandwidth() const { return static_cast<double>(num_subcarriers) * subcarrier_spacing; }
    std::size_t num_samples() const { return oversampling * num_subcarriers; }
    double sample_period() const { return symbol_duration() / static_cast<double>(num_samples()); }

    /// Throws std::invalid_argument on a zero count or non-positive spacing.
    void validate() const;
};

/// Samples of one symbol on [0, T_p). Subcarrier l occupies DFT bin l, so
/// bins [0, num_subcarriers) carry the whole band.
struct SampledSignal {
    std::vector<cdouble> samples;
    double sample_period = 0.0;
    std::size_t num_subcarriers = 0;

    double duration() const { return sample_period * static_cast<double>(samples.size()); }
    double mean_power() const;
};

/// s[n] = sum_l symbols[l] exp(j 2 pi l df n Ts), n = 0 .. N-1.
SampledSignal symbol_signal(const OfdmConfig& cfg, std::span<const cdouble> symbols);

struct RandomSymbol {
    SampledSignal signal;
    std::vector<cdouble> symbols;
};

/// Draws L symbols from `c` and synthesizes them.
RandomSymbol random_signal(const OfdmConfig& cfg, const Constellation& c, Seed seed);
RandomSymbol random_signal(const OfdmConfig& cfg, const Constellation& c, Generator& gen);

}  // namespace pcsisac
