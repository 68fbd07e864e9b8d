#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcsisac/constellation.hpp"
#include "pcsisac/ofdm.hpp"

namespace pcsisac {

/// sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

/// Overlap window of s(t) and s(t - tau) for a rect symbol of length T_p.
struct DelayGeometry {
    double tau = 0.0;
    double t_min = 0.0;   // max(0, tau)
    double t_max = 0.0;   // min(T_p, T_p + tau)
    double t_avg = 0.0;
    double t_diff = 0.0;  // T_p - |tau|, clamped at 0

    static DelayGeometry at(double tau, double symbol_duration);
    bool overlaps() const { return t_diff > 0.0; }
};

/// Same-subcarrier and different-subcarrier parts of the AF.
struct AfComponents {
    cdouble self{};
    cdouble cross{};
    cdouble total() const { return self + cross; }
};

/// Closed-form AF of one symbol vector at (tau, nu): a sum of sinc-weighted
/// subcarrier products. Zero for |tau| >= T_p.
AfComponents af_components(const OfdmConfig& cfg, std::span<const cdouble> symbols, double tau, double nu);
cdouble af_closed_form(const OfdmConfig& cfg, std::span<const cdouble> symbols, double tau, double nu);

/// Direct evaluation of the correlation integral from samples. The band-limited
/// waveform is recovered from its DFT bins, then s(t) s*(t - tau) e^{-j2pi nu t}
/// is integrated over the overlap by composite Gauss-Legendre quadrature.
/// Independent of the sinc algebra in af_closed_form; tau needs no snapping.
cdouble af_numeric(const SampledSignal& signal, double tau, double nu);

std::vector<double> linspace(double first, double last, std::size_t count);

struct DelayDopplerGrid {
    std::vector<double> tau;
    std::vector<double> nu;

    /// tau over [-T_p, T_p], nu over [-B/2, B/2].
    static DelayDopplerGrid defaults(const OfdmConfig& cfg, std::size_t tau_points = 257,
                                     std::size_t nu_points = 257);
};

enum class Normalization { none, peak };

/// Nonnegative AF magnitudes on a (tau, nu) grid, row-major in tau.
struct AmbiguitySurface {
    std::vector<double> tau_grid;
    std::vector<double> nu_grid;
    std::vector<double> values;
    Normalization normalization = Normalization::none;

    double at(std::size_t tau_index, std::size_t nu_index) const {
        return values[tau_index * nu_grid.size() + nu_index];
    }
    void normalize_peak();
};

/// Complex AF of one realization on the grid, row-major in tau.
std::vector<cdouble> af_closed_form_grid(const OfdmConfig& cfg, std::span<const cdouble> symbols,
                                         std::span<const double> tau_grid, std::span<const double> nu_grid,
                                         unsigned threads = 1);

/// (1/M) sum_m |X_m(tau, nu)| over M independent symbol draws, peak-normalized.
/// Trial m always uses substream m of `seed`; output is independent of `threads`.
AmbiguitySurface mc_average_af(const OfdmConfig& cfg, const Constellation& c, std::span<const double> tau_grid,
                               std::span<const double> nu_grid, std::size_t trials, Seed seed,
                               unsigned threads = 1);

/// Var{X_self(tau, nu)} = T_diff^2 sinc^2(nu T_diff) L (E{A^4} - 1).
double variance_self_closed(const OfdmConfig& cfg, const Constellation& c, double tau, double nu);

/// Var{X_cross(tau, nu)} = T_diff^2 sum_{l1 != l2} sinc^2(((l1 - l2) df - nu) T_diff).
/// Holds for independent zero-mean symbols with E{x^2} = 0 (QAM, M-PSK with M > 2);
/// it does not depend on the constellation otherwise.
double variance_cross_closed(const OfdmConfig& cfg, double tau, double nu);

/// Analytic zero-Doppler slices: |E X_self(tau, 0)| (a Dirichlet kernel scaled by
/// T_diff) and the rms of the zero-mean cross part, sqrt(Var{X_cross(tau, 0)}).
struct MeanAfSlices {
    std::vector<double> tau;
    std::vector<double> self;
    std::vector<double> cross;
};
MeanAfSlices mean_af_components(const OfdmConfig& cfg, std::span<const double> tau_grid);

/// Sample mean and variance of the self and cross parts at (tau_k, nu) over
/// `trials` symbol draws (trial m uses substream m of `seed`).
struct AfComponentStats {
    std::vector<double> tau;
    std::vector<cdouble> self_mean;
    std::vector<cdouble> cross_mean;
    std::vector<double> self_variance;   // E|X - E X|^2, unbiased
    std::vector<double> cross_variance;
    std::size_t trials = 0;
};
AfComponentStats af_component_stats(const OfdmConfig& cfg, const Constellation& c, std::span<const double> tau_grid,
                                    double nu, std::size_t trials, Seed seed, unsigned threads = 1);

/// 20 log10(v), floored at floor_db.
std::vector<double> magnitude_db(std::span<const double> values, double floor_db = -80.0);

}  // namespace pcsisac
