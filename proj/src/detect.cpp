#include "pcsisac/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "pcsisac/parallel.hpp"

namespace pcsisac {

namespace {

// Correlates against one reference; the reference spectrum is computed once.
class Correlator {
public:
    explicit Correlator(std::span<const cdouble> reference)
        : n_(reference.size()), spectrum_(2 * reference.size()) {
        std::copy(reference.begin(), reference.end(), spectrum_.begin());
        fft::transform(spectrum_, fft::Direction::forward);
        for (auto& v : spectrum_) v = std::conj(v);
    }

    std::vector<cdouble> correlate(std::span<const cdouble> rx) const {
        if (rx.size() != n_) throw std::invalid_argument("matched filter: rx and reference lengths differ");
        std::vector<cdouble> buf(2 * n_);
        std::copy(rx.begin(), rx.end(), buf.begin());
        fft::transform(buf, fft::Direction::forward);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= spectrum_[i];
        fft::transform(buf, fft::Direction::backward);
        buf.resize(n_);
        const double scale = 1.0 / static_cast<double>(2 * n_);
        for (auto& v : buf) v *= scale;
        return buf;
    }

private:
    std::size_t n_;
    std::vector<cdouble> spectrum_;
};

double window_mean(std::span<const double> profile, std::size_t first, std::size_t count) {
    double acc = 0.0;
    for (std::size_t i = first; i < first + count; ++i) acc += profile[i];
    return acc / static_cast<double>(count);
}

bool both_windows_fit(std::size_t cell, std::size_t length, const CfarConfig& cfar) {
    const std::size_t reach = cfar.window_cells + cfar.guard_cells;
    return cell >= reach && cell + reach < length;
}

// value / SO level for every interior cell of `trials` noise profiles.
std::vector<double> so_ratios(const CfarConfig& shape, const NoiseProfileModel& noise, std::size_t trials, Seed seed,
                              StreamTag tag, unsigned threads) {
    std::vector<std::vector<double>> per_trial(trials);
    parallel_for(trials, threads, [&](std::size_t m) {
        auto gen = make_stream(seed, tag, m);
        const auto profile = noise.generate(gen);
        auto& out = per_trial[m];
        for (std::size_t cell = 0; cell < profile.size(); ++cell) {
            if (!both_windows_fit(cell, profile.size(), shape)) continue;
            const double level = *so_cfar_level(profile, cell, shape);
            out.push_back(level > 0.0 ? profile[cell] / level : 0.0);
        }
    });
    std::vector<double> all;
    for (auto& v : per_trial) all.insert(all.end(), v.begin(), v.end());
    return all;
}

std::size_t interior_cells(std::size_t length, const CfarConfig& shape) {
    const std::size_t reach = shape.window_cells + shape.guard_cells;
    return length > 2 * reach ? length - 2 * reach : 0;
}

}  // namespace

void CfarConfig::validate() const {
    if (window_cells == 0) throw std::invalid_argument("cfar: window_cells must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("cfar: alpha must be positive");
}

std::vector<cdouble> cross_correlate(std::span<const cdouble> rx, std::span<const cdouble> reference) {
    if (rx.size() != reference.size()) throw std::invalid_argument("matched filter: rx and reference lengths differ");
    return Correlator(reference).correlate(rx);
}

std::vector<double> matched_filter(std::span<const cdouble> rx, std::span<const cdouble> reference) {
    const auto corr = cross_correlate(rx, reference);
    std::vector<double> out(corr.size());
    std::transform(corr.begin(), corr.end(), out.begin(), [](cdouble v) { return std::norm(v); });
    return out;
}

std::vector<double> matched_filter(const SampledSignal& rx, const SampledSignal& reference) {
    return matched_filter(std::span<const cdouble>(rx.samples), std::span<const cdouble>(reference.samples));
}

std::optional<double> so_cfar_level(std::span<const double> profile, std::size_t cell, const CfarConfig& cfar) {
    const std::size_t reach = cfar.window_cells + cfar.guard_cells;
    std::optional<double> level;
    if (cell >= reach) level = window_mean(profile, cell - reach, cfar.window_cells);
    if (cell + reach < profile.size()) {
        const double lag = window_mean(profile, cell + cfar.guard_cells + 1, cfar.window_cells);
        level = level ? std::min(*level, lag) : lag;
    }
    return level;
}

std::vector<bool> so_cfar(std::span<const double> profile, const CfarConfig& cfar) {
    cfar.validate();
    if (profile.size() <= 2 * (cfar.window_cells + cfar.guard_cells) + 1)
        throw std::invalid_argument("so_cfar: profile too short for the window geometry");
    std::vector<bool> hits(profile.size());
    for (std::size_t cell = 0; cell < profile.size(); ++cell)
        hits[cell] = profile[cell] > cfar.alpha * *so_cfar_level(profile, cell, cfar);
    return hits;
}

std::size_t NoiseProfileModel::profile_length() const {
    return kind == NoiseModel::exponential ? exponential_length : ofdm.num_samples();
}

std::vector<double> NoiseProfileModel::generate(Generator& gen) const {
    if (kind == NoiseModel::exponential) {
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> out(exponential_length);
        for (auto& v : out) v = expo(gen);
        return out;
    }
    const auto tx = random_signal(ofdm, constellation, gen);
    std::vector<cdouble> noise(tx.signal.samples.size());
    for (auto& v : noise) v = complex_gaussian(gen, 1.0);
    return matched_filter(std::span<const cdouble>(noise), std::span<const cdouble>(tx.signal.samples));
}

std::size_t default_calib_trials(std::size_t profile_length, const CfarConfig& shape, double pfa) {
    const auto cells = static_cast<double>(std::max<std::size_t>(1, interior_cells(profile_length, shape)));
    return static_cast<std::size_t>(std::ceil(2000.0 / (pfa * cells)));
}

CalibrationResult calibrate_alpha(const CfarConfig& shape, const NoiseProfileModel& noise, double pfa_target,
                                  std::size_t calib_trials, Seed seed, unsigned threads) {
    if (!(pfa_target > 0.0 && pfa_target < 1.0)) throw std::invalid_argument("calibrate_alpha: pfa must be in (0, 1)");
    if (shape.window_cells == 0) throw std::invalid_argument("cfar: window_cells must be >= 1");
    const double expected = static_cast<double>(calib_trials) *
                            static_cast<double>(interior_cells(noise.profile_length(), shape)) * pfa_target;
    if (expected < 100.0)
        throw std::invalid_argument("calibrate_alpha: only " + std::to_string(expected) +
                                    " false alarms expected; increase calib_trials");

    const auto ratios = so_ratios(shape, noise, calib_trials, seed, StreamTag::calibration, threads);
    const auto count_above = [&](double alpha) {
        return static_cast<std::size_t>(std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r > alpha; }));
    };
    const auto total = static_cast<double>(ratios.size());

    CalibrationResult out;
    double lo = 0.0;
    double hi = *std::max_element(ratios.begin(), ratios.end());
    constexpr int kMaxIter = 200;
    for (int it = 0; it < kMaxIter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const std::size_t hits = count_above(mid);
        const double pfa = static_cast<double>(hits) / total;
        out.trace.push_back({mid, pfa});
        out.alpha = mid;
        out.achieved = {pfa, ratios.size(), hits};
        if (std::abs(pfa - pfa_target) <= 0.01 * pfa_target || hi - lo <= 1e-12 * hi) break;
        (pfa > pfa_target ? lo : hi) = mid;
    }
    if (std::abs(out.achieved.pfa - pfa_target) > 0.2 * pfa_target)
        throw CalibrationFailed("calibrate_alpha: best alpha gives pfa " + std::to_string(out.achieved.pfa) +
                                    " for target " + std::to_string(pfa_target),
                                out.trace);
    return out;
}

PfaMeasurement empirical_pfa(const CfarConfig& cfar, const NoiseProfileModel& noise, std::size_t trials, Seed seed,
                             unsigned threads) {
    cfar.validate();
    const auto ratios = so_ratios(cfar, noise, trials, seed, StreamTag::validation, threads);
    PfaMeasurement m;
    m.cells = ratios.size();
    m.false_alarms =
        static_cast<std::size_t>(std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r > cfar.alpha; }));
    m.pfa = m.cells ? static_cast<double>(m.false_alarms) / static_cast<double>(m.cells) : 0.0;
    return m;
}

void DetectionScenario::validate() const {
    ofdm.validate();
    if (!(pfa_target > 0.0 && pfa_target < 1.0)) throw std::invalid_argument("detect: pfa must be in (0, 1)");
    if (trials == 0) throw std::invalid_argument("detect: need at least one trial");
    if (snr_grid_db.empty()) throw std::invalid_argument("detect: empty SNR grid");
    if (cfar.window_cells == 0) throw std::invalid_argument("cfar: window_cells must be >= 1");
    const std::size_t n = ofdm.num_samples();
    const std::size_t reach = cfar.window_cells + cfar.guard_cells;
    if (target_cell == 0 || target_cell >= n)
        throw std::invalid_argument("detect: target cell must lie in (0, " + std::to_string(n) + ")");
    if (target_cell < reach && target_cell + reach >= n)
        throw std::invalid_argument("detect: no CFAR reference window fits around the target cell");
}

PdResult pd_experiment(const DetectionScenario& scn) {
    scn.validate();
    const std::size_t n = scn.ofdm.num_samples();
    const auto subcarriers = static_cast<double>(scn.ofdm.num_subcarriers);

    NoiseProfileModel noise;
    noise.kind = NoiseModel::matched_filter;
    noise.ofdm = scn.ofdm;
    noise.constellation = scn.constellation;
    const std::size_t calib_trials =
        scn.calib_trials ? scn.calib_trials : default_calib_trials(n, scn.cfar, scn.pfa_target);

    PdResult result;
    result.calibration = calibrate_alpha(scn.cfar, noise, scn.pfa_target, calib_trials, scn.seed, scn.threads);
    CfarConfig cfar = scn.cfar;
    cfar.alpha = result.calibration.alpha;

    // per-sample powers relative to unit noise; tx carries L per sample on average
    const double si_gain = scn.include_si ? std::sqrt(std::pow(10.0, scn.si_to_noise_db / 10.0) / subcarriers) : 0.0;
    std::vector<double> target_gain;
    for (double snr : scn.snr_grid_db) target_gain.push_back(std::sqrt(std::pow(10.0, snr / 10.0) / subcarriers));

    const std::size_t reach = cfar.window_cells + cfar.guard_cells;
    const std::size_t cells = std::min(n, scn.target_cell + reach + 1);
    const std::size_t n_snr = target_gain.size();

    std::vector<unsigned char> hits(scn.trials * n_snr, 0);
    parallel_for(scn.trials, scn.threads, [&](std::size_t m) {
        auto sym_gen = make_stream(scn.seed, StreamTag::symbols, m);
        auto noise_gen = make_stream(scn.seed, StreamTag::noise, m);
        const auto tx = random_signal(scn.ofdm, scn.constellation, sym_gen);
        const auto& s = tx.signal.samples;

        const cdouble si_phase = std::polar(1.0, 2.0 * std::numbers::pi * uniform01(noise_gen));
        const cdouble target_phase = std::polar(1.0, 2.0 * std::numbers::pi * uniform01(noise_gen));
        std::vector<cdouble> w(n);
        for (auto& v : w) v = complex_gaussian(noise_gen, 1.0);
        std::vector<cdouble> delayed(n);
        std::copy(s.begin(), s.end() - static_cast<std::ptrdiff_t>(scn.target_cell),
                  delayed.begin() + static_cast<std::ptrdiff_t>(scn.target_cell));

        const Correlator corr(s);
        const auto r_si = corr.correlate(s);
        const auto r_target = corr.correlate(delayed);
        const auto r_noise = corr.correlate(w);

        std::vector<double> profile(cells);
        for (std::size_t k = 0; k < n_snr; ++k) {
            const cdouble a_si = si_gain * si_phase;
            const cdouble a_t = target_gain[k] * target_phase;
            for (std::size_t c = 0; c < cells; ++c) profile[c] = std::norm(a_si * r_si[c] + a_t * r_target[c] + r_noise[c]);
            const double level = *so_cfar_level(profile, scn.target_cell, cfar);
            hits[m * n_snr + k] = profile[scn.target_cell] > cfar.alpha * level;
        }
    });

    for (std::size_t k = 0; k < n_snr; ++k) {
        PdPoint p;
        p.snr_db = scn.snr_grid_db[k];
        p.trials = scn.trials;
        for (std::size_t m = 0; m < scn.trials; ++m) p.detections += hits[m * n_snr + k];
        p.pd = static_cast<double>(p.detections) / static_cast<double>(p.trials);
        result.points.push_back(p);
    }
    return result;
}

}  // namespace pcsisac
