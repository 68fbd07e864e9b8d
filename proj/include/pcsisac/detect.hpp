#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcsisac/constellation.hpp"
#include "pcsisac/errors.hpp"
#include "pcsisac/ofdm.hpp"

namespace pcsisac {

struct CfarConfig {
    std::size_t window_cells = 16;  // reference cells per side
    std::size_t guard_cells = 2;    // per side
    double alpha = 1.0;             // threshold multiplier

    void validate() const;
};

/// Complex linear cross-correlation sum_n rx[n] conj(ref[n - k]) at lags 0 .. N-1.
std::vector<cdouble> cross_correlate(std::span<const cdouble> rx, std::span<const cdouble> reference);

/// |cross_correlate(rx, reference)|^2, one range cell per lag.
std::vector<double> matched_filter(std::span<const cdouble> rx, std::span<const cdouble> reference);
std::vector<double> matched_filter(const SampledSignal& rx, const SampledSignal& reference);

/// Smallest-of noise estimate for `cell`: min of the leading and lagging
/// window means. A window that does not fit entirely inside the profile is
/// skipped, so edge cells use the one available side. nullopt if neither fits.
std::optional<double> so_cfar_level(std::span<const double> profile, std::size_t cell, const CfarConfig& cfar);

/// Per-cell decisions value > alpha * so_cfar_level.
/// Requires profile.size() > 2 (window + guard) + 1.
std::vector<bool> so_cfar(std::span<const double> profile, const CfarConfig& cfar);

/// Noise-only range profiles used to set the CFAR threshold.
enum class NoiseModel {
    exponential,     // i.i.d. unit-mean exponential cells (ideal square-law)
    matched_filter,  // |white complex noise correlated with a random OFDM replica|^2
};

struct NoiseProfileModel {
    NoiseModel kind = NoiseModel::matched_filter;
    std::size_t exponential_length = 256;
    OfdmConfig ofdm{};
    Constellation constellation = make_qam(16);

    std::size_t profile_length() const;
    std::vector<double> generate(Generator& gen) const;
};

struct PfaMeasurement {
    double pfa = 0.0;
    std::size_t cells = 0;
    std::size_t false_alarms = 0;
};

struct CalibrationResult {
    double alpha = 0.0;
    PfaMeasurement achieved;
    std::vector<CalibrationStep> trace;
};

/// Bisection on alpha against the per-cell false-alarm rate of SO-CFAR over
/// interior cells (both windows in range) of `calib_trials` noise profiles.
/// Throws std::invalid_argument if fewer than 100 false alarms are expected,
/// CalibrationFailed if the result misses pfa_target by more than 20%.
CalibrationResult calibrate_alpha(const CfarConfig& shape, const NoiseProfileModel& noise, double pfa_target,
                                  std::size_t calib_trials, Seed seed, unsigned threads = 1);

/// Profiles needed for about 2000 expected false alarms at `pfa`.
std::size_t default_calib_trials(std::size_t profile_length, const CfarConfig& shape, double pfa);

/// False-alarm rate of SO-CFAR at cfar.alpha on noise profiles drawn from a
/// stream family separate from calibrate_alpha's, so the same seed is held out.
PfaMeasurement empirical_pfa(const CfarConfig& cfar, const NoiseProfileModel& noise, std::size_t trials, Seed seed,
                             unsigned threads = 1);

/// Weak target next to strong self-interference.
///
/// Per trial: rx = SI * tx + target * tx(delayed by target_cell samples) + w,
/// with unit-variance complex noise w, SI/noise = si_to_noise_db and
/// target/noise = snr. rx is matched-filtered against the known tx and the
/// target cell is tested with SO-CFAR. Each trial's draws are shared by all
/// SNR points.
struct DetectionScenario {
    OfdmConfig ofdm{};
    Constellation constellation = make_qam(16);
    bool include_si = true;
    double si_to_noise_db = 10.0;
    std::size_t target_cell = 8;
    double pfa_target = 1e-3;
    std::vector<double> snr_grid_db;
    std::size_t trials = 5000;
    CfarConfig cfar{};
    std::size_t calib_trials = 0;  // 0 uses default_calib_trials
    Seed seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct PdPoint {
    double snr_db = 0.0;
    double pd = 0.0;
    std::size_t trials = 0;
    std::size_t detections = 0;
};

struct PdResult {
    CalibrationResult calibration;
    std::vector<PdPoint> points;
};

PdResult pd_experiment(const DetectionScenario& scenario);

}  // namespace pcsisac
