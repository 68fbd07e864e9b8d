#include "pcsisac/ambiguity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"
#include "pcsisac/parallel.hpp"

namespace pcsisac {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_symbols(const OfdmConfig& cfg, std::span<const cdouble> symbols) {
    cfg.validate();
    if (symbols.size() != cfg.num_subcarriers)
        throw std::invalid_argument("ambiguity: symbol count does not match num_subcarriers");
}

// C_k(tau) = sum_l a_{l+k} conj(a_l) e^{j 2pi l df tau}, stored at index k + L - 1.
void lag_products(std::span<const cdouble> a, std::span<const cdouble> phasor, std::vector<cdouble>& out) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    out.assign(static_cast<std::size_t>(2 * n - 1), cdouble{});
    for (std::ptrdiff_t k = -(n - 1); k <= n - 1; ++k) {
        cdouble acc{};
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -k);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, n - 1 - k);
        for (std::ptrdiff_t l = lo; l <= hi; ++l) acc += a[l + k] * std::conj(a[l]) * phasor[l];
        out[static_cast<std::size_t>(k + n - 1)] = acc;
    }
}

std::vector<cdouble> subcarrier_phasors(std::size_t count, double df, double tau) {
    std::vector<cdouble> ph(count);
    for (std::size_t l = 0; l < count; ++l) ph[l] = std::polar(1.0, kTwoPi * static_cast<double>(l) * df * tau);
    return ph;
}

// W_k = T_diff sinc((k df - nu) T_diff) e^{j 2pi (k df - nu) T_avg}
cdouble lag_weight(const DelayGeometry& g, double f) {
    return g.t_diff * sinc(f * g.t_diff) * std::polar(1.0, kTwoPi * f * g.t_avg);
}

void kernel_row(const DelayGeometry& g, std::size_t count, double df, double nu, std::span<cdouble> out) {
    const auto n = static_cast<std::ptrdiff_t>(count);
    for (std::ptrdiff_t k = -(n - 1); k <= n - 1; ++k)
        out[static_cast<std::size_t>(k + n - 1)] = lag_weight(g, static_cast<double>(k) * df - nu);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
template <int N>
struct GaussLegendre {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussLegendre() {
        for (int i = 0; i < N; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= N; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = N * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

// Horner evaluation of sum_l a_l z^l with z on the unit circle.
cdouble eval_band(std::span<const cdouble> coeffs, cdouble z) {
    cdouble acc{};
    for (std::size_t l = coeffs.size(); l-- > 0;) acc = acc * z + coeffs[l];
    return acc;
}

}  // namespace

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

DelayGeometry DelayGeometry::at(double tau, double symbol_duration) {
    DelayGeometry g;
    g.tau = tau;
    g.t_min = std::max(0.0, tau);
    g.t_max = std::min(symbol_duration, symbol_duration + tau);
    if (g.t_max <= g.t_min) {
        g.t_max = g.t_min;
        g.t_diff = 0.0;
    } else {
        g.t_diff = g.t_max - g.t_min;
    }
    g.t_avg = 0.5 * (g.t_max + g.t_min);
    return g;
}

AfComponents af_components(const OfdmConfig& cfg, std::span<const cdouble> symbols, double tau, double nu) {
    check_symbols(cfg, symbols);
    const auto g = DelayGeometry::at(tau, cfg.symbol_duration());
    if (!g.overlaps()) return {};
    const double df = cfg.subcarrier_spacing;
    const auto ph = subcarrier_phasors(symbols.size(), df, tau);
    std::vector<cdouble> c;
    lag_products(symbols, ph, c);

    const auto n = static_cast<std::ptrdiff_t>(symbols.size());
    AfComponents out;
    for (std::ptrdiff_t k = -(n - 1); k <= n - 1; ++k) {
        const cdouble term = lag_weight(g, static_cast<double>(k) * df - nu) * c[static_cast<std::size_t>(k + n - 1)];
        if (k == 0)
            out.self = term;
        else
            out.cross += term;
    }
    return out;
}

cdouble af_closed_form(const OfdmConfig& cfg, std::span<const cdouble> symbols, double tau, double nu) {
    return af_components(cfg, symbols, tau, nu).total();
}

cdouble af_numeric(const SampledSignal& signal, double tau, double nu) {
    const std::size_t n = signal.samples.size();
    if (n == 0 || !(signal.sample_period > 0.0)) throw std::invalid_argument("af_numeric: empty signal");
    const std::size_t band = signal.num_subcarriers == 0 ? n : std::min(signal.num_subcarriers, n);
    const double tp = signal.duration();
    const double df = 1.0 / tp;

    const auto g = DelayGeometry::at(tau, tp);
    if (!g.overlaps()) return {};

    std::vector<cdouble> coeffs(signal.samples);
    fft::transform(coeffs, fft::Direction::forward);
    coeffs.resize(band);
    for (auto& v : coeffs) v /= static_cast<double>(n);

    static const GaussLegendre<16> rule;
    // half a cycle of the fastest integrand component per panel
    const double f_max = static_cast<double>(band - 1) * df + std::abs(nu);
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(2.0 * f_max * g.t_diff)));
    const double h = g.t_diff / static_cast<double>(panels);

    cdouble acc{};
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = g.t_min + (static_cast<double>(p) + 0.5) * h;
        cdouble panel{};
        for (int i = 0; i < 16; ++i) {
            const double t = mid + 0.5 * h * rule.x[i];
            const cdouble s = eval_band(coeffs, std::polar(1.0, kTwoPi * df * t));
            const cdouble s_delayed = eval_band(coeffs, std::polar(1.0, kTwoPi * df * (t - tau)));
            panel += rule.w[i] * s * std::conj(s_delayed) * std::polar(1.0, -kTwoPi * nu * t);
        }
        acc += 0.5 * h * panel;
    }
    return acc;
}

std::vector<double> linspace(double first, double last, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = first;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i)
        v[i] = first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

DelayDopplerGrid DelayDopplerGrid::defaults(const OfdmConfig& cfg, std::size_t tau_points, std::size_t nu_points) {
    const double tp = cfg.symbol_duration();
    const double half_band = 0.5 * cfg.bandwidth();
    return {linspace(-tp, tp, tau_points), linspace(-half_band, half_band, nu_points)};
}

void AmbiguitySurface::normalize_peak() {
    const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    if (peak > 0.0)
        for (auto& v : values) v /= peak;
    normalization = Normalization::peak;
}

std::vector<cdouble> af_closed_form_grid(const OfdmConfig& cfg, std::span<const cdouble> symbols,
                                         std::span<const double> tau_grid, std::span<const double> nu_grid,
                                         unsigned threads) {
    check_symbols(cfg, symbols);
    const std::size_t n_nu = nu_grid.size();
    const std::size_t lags = 2 * symbols.size() - 1;
    std::vector<cdouble> out(tau_grid.size() * n_nu);
    parallel_for(tau_grid.size(), threads, [&](std::size_t i) {
        const auto g = DelayGeometry::at(tau_grid[i], cfg.symbol_duration());
        if (!g.overlaps()) return;
        const auto ph = subcarrier_phasors(symbols.size(), cfg.subcarrier_spacing, g.tau);
        std::vector<cdouble> c, w(lags);
        lag_products(symbols, ph, c);
        for (std::size_t j = 0; j < n_nu; ++j) {
            kernel_row(g, symbols.size(), cfg.subcarrier_spacing, nu_grid[j], w);
            cdouble acc{};
            for (std::size_t k = 0; k < lags; ++k) acc += w[k] * c[k];
            out[i * n_nu + j] = acc;
        }
    });
    return out;
}

AmbiguitySurface mc_average_af(const OfdmConfig& cfg, const Constellation& c, std::span<const double> tau_grid,
                               std::span<const double> nu_grid, std::size_t trials, Seed seed, unsigned threads) {
    cfg.validate();
    if (trials == 0) throw std::invalid_argument("mc_average_af: need at least one trial");
    const std::size_t count = cfg.num_subcarriers;
    const std::size_t lags = 2 * count - 1;
    const std::size_t n_nu = nu_grid.size();

    std::vector<std::vector<cdouble>> draws(trials);
    for (std::size_t m = 0; m < trials; ++m) {
        auto gen = make_stream(seed, StreamTag::symbols, m);
        draws[m] = sample_symbols(c, count, gen);
    }

    AmbiguitySurface surf;
    surf.tau_grid.assign(tau_grid.begin(), tau_grid.end());
    surf.nu_grid.assign(nu_grid.begin(), nu_grid.end());
    surf.values.assign(tau_grid.size() * n_nu, 0.0);

    parallel_for(tau_grid.size(), threads, [&](std::size_t i) {
        const auto g = DelayGeometry::at(tau_grid[i], cfg.symbol_duration());
        if (!g.overlaps()) return;
        std::vector<cdouble> kernel(n_nu * lags);
        for (std::size_t j = 0; j < n_nu; ++j)
            kernel_row(g, count, cfg.subcarrier_spacing, nu_grid[j], std::span(kernel).subspan(j * lags, lags));
        const auto ph = subcarrier_phasors(count, cfg.subcarrier_spacing, g.tau);

        std::vector<double> row(n_nu, 0.0);
        std::vector<cdouble> lagged;
        for (const auto& symbols : draws) {
            lag_products(symbols, ph, lagged);
            for (std::size_t j = 0; j < n_nu; ++j) {
                const cdouble* w = kernel.data() + j * lags;
                cdouble acc{};
                for (std::size_t k = 0; k < lags; ++k) acc += w[k] * lagged[k];
                row[j] += std::abs(acc);
            }
        }
        for (std::size_t j = 0; j < n_nu; ++j) surf.values[i * n_nu + j] = row[j] / static_cast<double>(trials);
    });
    surf.normalize_peak();
    return surf;
}

double variance_self_closed(const OfdmConfig& cfg, const Constellation& c, double tau, double nu) {
    cfg.validate();
    const auto g = DelayGeometry::at(tau, cfg.symbol_duration());
    if (!g.overlaps()) return 0.0;
    const double s = sinc(-nu * g.t_diff);
    return g.t_diff * g.t_diff * s * s * static_cast<double>(cfg.num_subcarriers) * (moment(c, 4) - 1.0);
}

double variance_cross_closed(const OfdmConfig& cfg, double tau, double nu) {
    cfg.validate();
    const auto g = DelayGeometry::at(tau, cfg.symbol_duration());
    if (!g.overlaps()) return 0.0;
    const auto n = static_cast<std::ptrdiff_t>(cfg.num_subcarriers);
    const double df = cfg.subcarrier_spacing;
    double acc = 0.0;
    for (std::ptrdiff_t k = 1; k < n; ++k) {
        const double up = sinc((static_cast<double>(k) * df - nu) * g.t_diff);
        const double down = sinc((-static_cast<double>(k) * df - nu) * g.t_diff);
        acc += static_cast<double>(n - k) * (up * up + down * down);
    }
    return g.t_diff * g.t_diff * acc;
}

MeanAfSlices mean_af_components(const OfdmConfig& cfg, std::span<const double> tau_grid) {
    cfg.validate();
    MeanAfSlices out;
    out.tau.assign(tau_grid.begin(), tau_grid.end());
    for (double tau : tau_grid) {
        const auto g = DelayGeometry::at(tau, cfg.symbol_duration());
        cdouble dirichlet{};
        if (g.overlaps())
            for (auto ph : subcarrier_phasors(cfg.num_subcarriers, cfg.subcarrier_spacing, tau)) dirichlet += ph;
        out.self.push_back(g.t_diff * std::abs(dirichlet));
        out.cross.push_back(std::sqrt(variance_cross_closed(cfg, tau, 0.0)));
    }
    return out;
}

AfComponentStats af_component_stats(const OfdmConfig& cfg, const Constellation& c, std::span<const double> tau_grid,
                                    double nu, std::size_t trials, Seed seed, unsigned threads) {
    cfg.validate();
    if (trials < 2) throw std::invalid_argument("af_component_stats: need at least two trials");
    std::vector<std::vector<cdouble>> draws(trials);
    for (std::size_t m = 0; m < trials; ++m) {
        auto gen = make_stream(seed, StreamTag::symbols, m);
        draws[m] = sample_symbols(c, cfg.num_subcarriers, gen);
    }

    AfComponentStats out;
    out.tau.assign(tau_grid.begin(), tau_grid.end());
    out.trials = trials;
    const std::size_t n_tau = tau_grid.size();
    out.self_mean.resize(n_tau);
    out.cross_mean.resize(n_tau);
    out.self_variance.resize(n_tau);
    out.cross_variance.resize(n_tau);

    parallel_for(n_tau, threads, [&](std::size_t i) {
        // Welford in trial order
        cdouble mean_s{}, mean_c{};
        double m2_s = 0.0, m2_c = 0.0;
        for (std::size_t m = 0; m < trials; ++m) {
            const auto x = af_components(cfg, draws[m], tau_grid[i], nu);
            const double k = static_cast<double>(m + 1);
            const cdouble ds = x.self - mean_s;
            mean_s += ds / k;
            m2_s += std::real(std::conj(ds) * (x.self - mean_s));
            const cdouble dc = x.cross - mean_c;
            mean_c += dc / k;
            m2_c += std::real(std::conj(dc) * (x.cross - mean_c));
        }
        const double denom = static_cast<double>(trials - 1);
        out.self_mean[i] = mean_s;
        out.cross_mean[i] = mean_c;
        out.self_variance[i] = m2_s / denom;
        out.cross_variance[i] = m2_c / denom;
    });
    return out;
}

std::vector<double> magnitude_db(std::span<const double> values, double floor_db) {
    std::vector<double> out(values.size());
    const double floor_lin = std::pow(10.0, floor_db / 20.0);
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return 20.0 * std::log10(std::max(v, floor_lin)); });
    return out;
}

}  // namespace pcsisac
