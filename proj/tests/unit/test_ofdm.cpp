#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pcsisac/ofdm.hpp"

using namespace pcsisac;

TEST_SUITE("ofdm") {
    TEST_CASE("configuration geometry") {
        const auto cfg = OfdmConfig::from_bandwidth(100e6, 64, 4);
        CHECK(cfg.subcarrier_spacing == doctest::Approx(100e6 / 64));
        CHECK(cfg.symbol_duration() == doctest::Approx(0.64e-6));
        CHECK(cfg.bandwidth() == doctest::Approx(100e6));
        CHECK(cfg.num_samples() == 256);
        CHECK(cfg.sample_period() * 256 == doctest::Approx(cfg.symbol_duration()));
        CHECK_THROWS_AS(OfdmConfig::from_bandwidth(100e6, 0), std::invalid_argument);
        CHECK_THROWS_AS(OfdmConfig::from_bandwidth(-1.0, 8), std::invalid_argument);
        CHECK_THROWS_AS((OfdmConfig{8, 1e6, 0}.validate()), std::invalid_argument);
    }

    TEST_CASE("synthesis matches the direct subcarrier sum") {
        const OfdmConfig cfg{8, 1e6, 3};
        const auto c = make_qam(16);
        const auto sym = random_signal(cfg, c, Seed{4});
        const double ts = cfg.sample_period();
        for (std::size_t n = 0; n < cfg.num_samples(); ++n) {
            cdouble direct{};
            for (std::size_t l = 0; l < cfg.num_subcarriers; ++l)
                direct += sym.symbols[l] *
                          std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(l) * cfg.subcarrier_spacing *
                                              static_cast<double>(n) * ts);
            CHECK(std::abs(sym.signal.samples[n] - direct) < 1e-12);
        }
        CHECK(sym.signal.duration() == doctest::Approx(cfg.symbol_duration()));
    }

    TEST_CASE("mean sample power equals symbol energy (Parseval)") {
        const OfdmConfig cfg{32, 1e6, 4};
        const auto sym = random_signal(cfg, make_qam(64), Seed{9});
        double energy = 0.0;
        for (auto a : sym.symbols) energy += std::norm(a);
        CHECK(sym.signal.mean_power() == doctest::Approx(energy).epsilon(1e-12));
    }

    TEST_CASE("synthesis is linear") {
        const OfdmConfig cfg{16, 1e6, 2};
        const auto a = sample_symbols(make_qam(16), 16, Seed{1});
        const auto b = sample_symbols(make_qam(16), 16, Seed{2});
        std::vector<cdouble> mix(16);
        const cdouble wa{0.3, -1.1}, wb{2.0, 0.5};
        for (std::size_t i = 0; i < 16; ++i) mix[i] = wa * a[i] + wb * b[i];
        const auto sa = symbol_signal(cfg, a), sb = symbol_signal(cfg, b), sm = symbol_signal(cfg, mix);
        for (std::size_t n = 0; n < sm.samples.size(); ++n)
            CHECK(std::abs(sm.samples[n] - (wa * sa.samples[n] + wb * sb.samples[n])) < 1e-12);
    }

    TEST_CASE("symbol count must match the subcarriers") {
        const OfdmConfig cfg{16, 1e6, 2};
        CHECK_THROWS_AS(symbol_signal(cfg, std::vector<cdouble>(15)), std::invalid_argument);
    }

    TEST_CASE("random signals are reproducible per seed") {
        const OfdmConfig cfg{16, 1e6, 2};
        const auto c = make_psk(8);
        CHECK(random_signal(cfg, c, Seed{3}).symbols == random_signal(cfg, c, Seed{3}).symbols);
        CHECK(random_signal(cfg, c, Seed{3}).symbols != random_signal(cfg, c, Seed{4}).symbols);
    }
}
