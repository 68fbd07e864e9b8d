#pragma once

#include <span>
#include <vector>

#include "pcsisac/constellation.hpp"

namespace pcsisac {

/// Fixed point amplitudes A_q plus the fourth-moment target c0.
struct PcsProblem {
    std::vector<double> amplitudes;
    double c0 = 1.0;

    static PcsProblem from(const Constellation& c, double c0);
};

enum class TieBreak { max_entropy, none };

struct FourthMomentRange {
    double min = 1.0;
    double max = 1.0;
};

struct PcsSolution {
    std::vector<double> probs;
    double c0 = 0.0;
    double achieved_m4 = 0.0;  // sum p A^4
    double gap = 0.0;          // |achieved_m4 - c0|
    FourthMomentRange feasible_range;
    double entropy_bits = 0.0;
    int lp_iterations = 0;
    int entropy_iterations = 0;
};

std::vector<double> amplitudes(const Constellation& c);

/// Extremes of sum p A^4 over {p >= 0, sum p = 1, sum p A^2 = 1}.
/// Throws InfeasibleSupport when no distribution on the support has unit power.
FourthMomentRange fourth_moment_range(std::span<const double> amplitudes);

/// Minimizes |sum p A^4 - c0| over the unit-power simplex.
///
/// The absolute value is handled as an epigraph LP (minimize t with
/// -t <= sum p A^4 - c0 <= t). Targets outside the feasible range clamp to the
/// nearest endpoint. With TieBreak::max_entropy the returned p is the unique
/// maximum-entropy point of the optimal face, so points sharing an energy
/// level always receive equal mass.
PcsSolution solve_pcs(const PcsProblem& problem, TieBreak tie_break = TieBreak::max_entropy);

std::vector<PcsSolution> sweep_c0(std::span<const double> amplitudes, std::span<const double> c0_grid,
                                  TieBreak tie_break = TieBreak::max_entropy);

/// `base` with its probabilities replaced by a PCS solution.
Constellation shaped(const Constellation& base, const PcsSolution& solution);

}  // namespace pcsisac
