#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace pcsisac {

using Seed = std::uint64_t;
using Generator = std::mt19937_64;

/// Purpose tags keep substreams drawn from the same (seed, index) pair apart.
enum class StreamTag : std::uint64_t {
    symbols = 1,
    noise = 2,
    calibration = 3,
    air = 4,
    validation = 5,
};

/// Generator for substream `index` of `seed`. Substreams depend only on
/// (seed, tag, index), so work can be split across threads in any order
/// without changing results.
Generator make_stream(Seed seed, StreamTag tag, std::uint64_t index = 0);

/// Uniform double in [0, 1).
inline double uniform01(Generator& gen) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_gaussian(Generator& gen, double variance) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = normal(gen);
    const double im = normal(gen);
    return {s * re, s * im};
}

}  // namespace pcsisac
