#include "pcsisac/ofdm.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace pcsisac {

OfdmConfig OfdmConfig::from_bandwidth(double bandwidth_hz, std::size_t num_subcarriers,
                                      std::size_t oversampling) {
    if (num_subcarriers == 0) throw std::invalid_argument("ofdm: need at least one subcarrier");
    OfdmConfig cfg{num_subcarriers, bandwidth_hz / static_cast<double>(num_subcarriers), oversampling};
    cfg.validate();
    return cfg;
}

void OfdmConfig::validate() const {
    if (num_subcarriers == 0) throw std::invalid_argument("ofdm: need at least one subcarrier");
    if (oversampling == 0) throw std::invalid_argument("ofdm: oversampling must be >= 1");
    if (!(subcarrier_spacing > 0.0) || !std::isfinite(subcarrier_spacing))
        throw std::invalid_argument("ofdm: subcarrier spacing must be positive");
}

double SampledSignal::mean_power() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

SampledSignal symbol_signal(const OfdmConfig& cfg, std::span<const cdouble> symbols) {
    cfg.validate();
    if (symbols.size() != cfg.num_subcarriers)
        throw std::invalid_argument("symbol_signal: expected " + std::to_string(cfg.num_subcarriers) +
                                    " symbols, got " + std::to_string(symbols.size()));
    SampledSignal out;
    out.samples.assign(cfg.num_samples(), cdouble{});
    std::copy(symbols.begin(), symbols.end(), out.samples.begin());
    fft::transform(out.samples, fft::Direction::backward);
    out.sample_period = cfg.sample_period();
    out.num_subcarriers = cfg.num_subcarriers;
    return out;
}

RandomSymbol random_signal(const OfdmConfig& cfg, const Constellation& c, Generator& gen) {
    RandomSymbol out;
    out.symbols = sample_symbols(c, cfg.num_subcarriers, gen);
    out.signal = symbol_signal(cfg, out.symbols);
    return out;
}

RandomSymbol random_signal(const OfdmConfig& cfg, const Constellation& c, Seed seed) {
    auto gen = make_stream(seed, StreamTag::symbols);
    return random_signal(cfg, c, gen);
}

}  // namespace pcsisac
