#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcsisac/constellation.hpp"
#include "pcsisac/pcs.hpp"

namespace pcsisac {

struct AirConfig {
    double noise_variance = 0.01;  // total complex variance (sigma^2 / 2 per dimension)
    std::size_t mc_trials = 200000;
    Seed seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct AirEstimate {
    double rate = 0.0;       // bits per symbol
    double std_error = 0.0;  // Monte-Carlo standard error of `rate`
};

/// Mutual information of y = x + n for x ~ c and complex AWGN, in bits/symbol.
/// R = H(Y) - log2(pi e sigma^2) with H(Y) estimated by Monte-Carlo over
/// y_k = x_k + n_k, each log p_Y(y_k) evaluated by log-sum-exp.
/// Samples are drawn in fixed-size chunks with one substream per chunk.
AirEstimate air_mc(const Constellation& c, const AirConfig& cfg);

struct AirC0Point {
    double c0 = 0.0;
    AirEstimate air;
    double achieved_m4 = 0.0;
    double gap = 0.0;
    double entropy_bits = 0.0;
};

/// Shapes `base` with max-entropy PCS at each c0 and estimates its AIR.
std::vector<AirC0Point> air_vs_c0(const Constellation& base, std::span<const double> c0_grid,
                                  const AirConfig& cfg);

struct AirSnrPoint {
    double snr_db = 0.0;
    double noise_variance = 0.0;
    AirEstimate air;
};

/// One rate series per constellation; sigma^2 = 10^(-snr/10) under unit power.
std::vector<std::vector<AirSnrPoint>> air_vs_snr(std::span<const Constellation> constellations,
                                                 std::span<const double> snr_grid_db, const AirConfig& cfg);

}  // namespace pcsisac
