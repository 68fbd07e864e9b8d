#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pcsisac/detect.hpp"

using namespace pcsisac;

namespace {

std::vector<double> direct_correlation(const std::vector<cdouble>& rx, const std::vector<cdouble>& ref) {
    std::vector<double> out(rx.size());
    for (std::size_t k = 0; k < rx.size(); ++k) {
        cdouble acc{};
        for (std::size_t n = k; n < rx.size(); ++n) acc += rx[n] * std::conj(ref[n - k]);
        out[k] = std::norm(acc);
    }
    return out;
}

// SO-CFAR with two n-cell windows on i.i.d. unit exponential cells:
// Pfa(alpha) = 2 x^-n sum_{k<n} C(n-1+k, k) x^-k, x = 2 + alpha / n.
double so_pfa(double alpha, int n) {
    const double x = 2.0 + alpha / n;
    double acc = 0.0, binom = 1.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) binom *= static_cast<double>(n - 1 + k) / k;
        acc += binom * std::pow(x, -k);
    }
    return 2.0 * std::pow(x, -n) * acc;
}

double so_alpha(double pfa, int n) {
    double lo = 0.0, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (so_pfa(mid, n) > pfa ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ca_threshold(const std::vector<double>& p, std::size_t cell, const CfarConfig& cfg) {
    const std::size_t r = cfg.window_cells + cfg.guard_cells;
    double acc = 0.0;
    for (std::size_t i = cell - r; i < cell - cfg.guard_cells; ++i) acc += p[i];
    for (std::size_t i = cell + cfg.guard_cells + 1; i <= cell + r; ++i) acc += p[i];
    return cfg.alpha * acc / (2.0 * cfg.window_cells);
}

}  // namespace

TEST_SUITE("detect") {
    TEST_CASE("matched filter peaks at the echo delay and matches direct correlation") {
        const OfdmConfig cfg{16, 1e6, 4};
        const auto tx = random_signal(cfg, make_qam(16), Seed{2}).signal;
        const auto self = matched_filter(tx, tx);
        CHECK(std::max_element(self.begin(), self.end()) - self.begin() == 0);
        for (std::size_t k : {1u, 5u, 20u}) {
            std::vector<cdouble> delayed(tx.samples.size());
            std::copy(tx.samples.begin(), tx.samples.end() - k, delayed.begin() + k);
            const auto prof = matched_filter(delayed, tx.samples);
            CHECK(static_cast<std::size_t>(std::max_element(prof.begin(), prof.end()) - prof.begin()) == k);
            const auto ref = direct_correlation(delayed, tx.samples);
            for (std::size_t i = 0; i < prof.size(); ++i) CHECK(prof[i] == doctest::Approx(ref[i]).epsilon(1e-9));
        }
        CHECK_THROWS_AS(matched_filter(std::vector<cdouble>(4), std::vector<cdouble>(5)), std::invalid_argument);
    }

    TEST_CASE("noise-only profile follows the overlapping replica energy") {
        // E|sum_n w[n] conj(ref[n-k])|^2 = sum_{m < N-k} |ref[m]|^2 for unit white noise
        const OfdmConfig cfg{16, 1e6, 4};
        const auto ref = random_signal(cfg, make_qam(16), Seed{3}).signal.samples;
        const std::size_t n = ref.size();
        std::vector<double> mean(n, 0.0);
        const int trials = 4000;
        auto gen = make_stream(4, StreamTag::noise);
        for (int t = 0; t < trials; ++t) {
            std::vector<cdouble> w(n);
            for (auto& v : w) v = complex_gaussian(gen, 1.0);
            const auto p = matched_filter(w, ref);
            for (std::size_t k = 0; k < n; ++k) mean[k] += p[k] / trials;
        }
        for (std::size_t k : {0u, 10u, 32u, 50u}) {
            double expect = 0.0;
            for (std::size_t m = 0; m + k < n; ++m) expect += std::norm(ref[m]);
            CHECK(mean[k] == doctest::Approx(expect).epsilon(5.0 / std::sqrt(trials)));
        }
    }

    TEST_CASE("SO-CFAR geometry and decisions") {
        CfarConfig cfg{4, 1, 1.5};
        std::vector<double> flat(20, 3.0);
        const auto none = so_cfar(flat, cfg);
        CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));

        // edge cells use the one window that fits
        std::vector<double> ramp(20);
        std::iota(ramp.begin(), ramp.end(), 1.0);
        CHECK(*so_cfar_level(ramp, 0, cfg) == doctest::Approx((3 + 4 + 5 + 6) / 4.0));
        CHECK(*so_cfar_level(ramp, 19, cfg) == doctest::Approx((15 + 16 + 17 + 18) / 4.0));
        CHECK(*so_cfar_level(ramp, 10, cfg) == doctest::Approx((6 + 7 + 8 + 9) / 4.0));
        CHECK_FALSE(so_cfar_level(std::vector<double>(8, 1.0), 4, cfg).has_value());

        auto spiky = flat;
        spiky[9] = 100.0;
        const auto hits = so_cfar(spiky, cfg);
        CHECK(hits[9]);
        CHECK(std::count(hits.begin(), hits.end(), true) == 1);

        CHECK_THROWS_AS(so_cfar(std::vector<double>(11, 1.0), cfg), std::invalid_argument);
        CHECK_NOTHROW(so_cfar(std::vector<double>(12, 1.0), cfg));
        CHECK_THROWS_AS(so_cfar(flat, CfarConfig{0, 1, 1.0}), std::invalid_argument);
        CHECK_THROWS_AS(so_cfar(flat, CfarConfig{4, 1, 0.0}), std::invalid_argument);
    }

    TEST_CASE("decisions are invariant to positive scaling of the profile") {
        auto gen = make_stream(6, StreamTag::noise);
        std::exponential_distribution<double> expo(1.0);
        const CfarConfig cfg{16, 2, 4.0};
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> p(128);
            for (auto& v : p) v = expo(gen);
            const double k = std::exp(10.0 * (uniform01(gen) - 0.5));
            auto scaled = p;
            for (auto& v : scaled) v *= k;
            CHECK(so_cfar(p, cfg) == so_cfar(scaled, cfg));
        }
    }

    TEST_CASE("smallest-of keeps the threshold at the noise level next to a strong interferer") {
        auto gen = make_stream(7, StreamTag::noise);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> p(128);
        for (auto& v : p) v = expo(gen);
        const std::size_t cell = 60;
        for (std::size_t i = cell - 10; i < cell - 6; ++i) p[i] = 1e4;  // interferer inside the leading window
        p[cell] = 30.0;                                                     // weak target
        const CfarConfig cfg{16, 2, 9.569};
        CHECK(so_cfar(p, cfg)[cell]);
        CHECK(p[cell] < ca_threshold(p, cell, cfg));  // cell averaging masks it
    }

    TEST_CASE("calibration on exponential cells matches the analytic SO false-alarm law") {
        NoiseProfileModel noise;
        noise.kind = NoiseModel::exponential;
        noise.exponential_length = 256;
        for (auto [pfa, window] : {std::pair{0.5, 8}, std::pair{0.01, 16}, std::pair{1e-3, 16}}) {
            CfarConfig shape{static_cast<std::size_t>(window), 2, 1.0};
            const auto trials = default_calib_trials(256, shape, pfa);
            const auto res = calibrate_alpha(shape, noise, pfa, trials, 11, 2);
            CHECK(std::abs(res.achieved.pfa / pfa - 1.0) <= 0.2);
            // relative alpha error from binomial noise in the ~2000 calibration hits
            CHECK(res.alpha == doctest::Approx(so_alpha(pfa, window)).epsilon(0.06));
            CHECK_FALSE(res.trace.empty());
        }
        CHECK(so_alpha(0.5, 8) == doctest::Approx(0.892071).epsilon(1e-5));
    }

    TEST_CASE("alpha falls as the target false-alarm rate rises, and holds on held-out noise") {
        NoiseProfileModel noise;
        noise.ofdm = OfdmConfig{64, 100e6 / 64, 4};
        const CfarConfig shape{16, 2, 1.0};
        double last = 1e9;
        for (double pfa : {1e-3, 1e-2, 1e-1}) {
            const auto res = calibrate_alpha(shape, noise, pfa, default_calib_trials(256, shape, pfa), 1, 2);
            CHECK(res.alpha < last);
            last = res.alpha;
            CfarConfig fixed = shape;
            fixed.alpha = res.alpha;
            const auto check = empirical_pfa(fixed, noise, default_calib_trials(256, shape, pfa), 1, 2);
            CHECK(std::abs(check.pfa / pfa - 1.0) <= 0.25);
        }
    }

    TEST_CASE("calibration refuses too few expected false alarms") {
        NoiseProfileModel noise;
        noise.kind = NoiseModel::exponential;
        CHECK_THROWS_AS(calibrate_alpha({16, 2, 1.0}, noise, 1e-3, 10, 0), std::invalid_argument);
        CHECK_THROWS_AS(calibrate_alpha({16, 2, 1.0}, noise, 1.5, 10000, 0), std::invalid_argument);
    }

    TEST_CASE("Pd experiment: null hypothesis, strong target, determinism") {
        DetectionScenario scn;
        scn.ofdm = OfdmConfig{32, 1e6, 4};
        scn.include_si = false;
        scn.target_cell = 60;  // interior: both reference windows in range
        scn.pfa_target = 0.01;
        scn.snr_grid_db = {-std::numeric_limits<double>::infinity(), 30.0};
        scn.trials = 20000;
        scn.seed = 3;
        scn.threads = 2;
        const auto res = pd_experiment(scn);
        const double p0 = res.points[0].pd;
        CHECK(std::abs(p0 - 0.01) < 4.0 * std::sqrt(0.01 * 0.99 / scn.trials) + 0.002);
        CHECK(res.points[1].pd > 0.99);

        scn.trials = 500;
        scn.snr_grid_db = {-5, 0, 5};
        scn.threads = 1;
        const auto a = pd_experiment(scn);
        scn.threads = 3;
        const auto b = pd_experiment(scn);
        for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].detections == b.points[i].detections);
        CHECK(a.calibration.alpha == b.calibration.alpha);
    }

    TEST_CASE("Pd rises with SNR next to self-interference") {
        DetectionScenario scn;
        scn.snr_grid_db = {-10, -5, 0, 5, 10, 15};
        scn.trials = 800;
        scn.seed = 1;
        const auto res = pd_experiment(scn);
        for (std::size_t i = 1; i < res.points.size(); ++i) {
            const double p = res.points[i].pd;
            CHECK(p >= res.points[i - 1].pd - 2.0 * std::sqrt(p * (1 - p) / scn.trials) - 1e-12);
        }
        CHECK(res.points.back().pd > 0.95);
    }

    TEST_CASE("scenario validation") {
        DetectionScenario scn;
        scn.snr_grid_db = {0.0};
        scn.trials = 1;
        auto bad = scn;
        bad.pfa_target = 0.0;
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
        bad = scn;
        bad.trials = 0;
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
        bad = scn;
        bad.snr_grid_db.clear();
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
        bad = scn;
        bad.target_cell = 256;
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
        bad = scn;
        bad.target_cell = 0;
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
        bad = scn;
        bad.cfar.window_cells = 200;
        CHECK_THROWS_AS(pd_experiment(bad), std::invalid_argument);
    }
}
