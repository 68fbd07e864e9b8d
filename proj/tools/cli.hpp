#pragma once

#include <string>
#include <vector>

#include "pcsisac/constellation.hpp"

namespace pcsisac::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point behind the pcsisac executable. Returns the process exit code.
int run(int argc, const char* const* argv);

/// "a:step:b" (inclusive, step may be negative) or a comma list "a,b,c".
std::vector<double> parse_grid(const std::string& text);

/// qam16, qam64, psk8, bpsk, qpsk, ... (case-insensitive).
Constellation parse_modulation(const std::string& text);

}  // namespace pcsisac::cli
