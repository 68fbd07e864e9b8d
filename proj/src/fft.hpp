#pragma once

#include <complex>
#include <span>

namespace pcsisac::fft {

enum class Direction { forward, backward };

/// Unnormalized in-place DFT: forward uses e^{-j2pi kn/N}, backward e^{+j2pi kn/N}.
/// Safe to call concurrently; plans are cached per (size, direction).
void transform(std::span<std::complex<double>> data, Direction dir);

}  // namespace pcsisac::fft
