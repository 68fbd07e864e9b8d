#include "pcsisac/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcsisac {

namespace {

constexpr double kInvariantTol = 1e-9;
constexpr double kProbSlack = 1e-12;

void validate(std::span<const cdouble> points, std::span<const double> probs) {
    if (points.empty()) throw std::invalid_argument("constellation: no points");
    if (points.size() != probs.size())
        throw std::invalid_argument("constellation: points/probs length mismatch");

    double total = 0.0;
    double power = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q) {
        const double p = probs[q];
        if (!std::isfinite(p) || p < -kProbSlack || p > 1.0 + kProbSlack)
            throw std::invalid_argument("constellation: probability out of [0, 1] at index " +
                                        std::to_string(q));
        if (!std::isfinite(points[q].real()) || !std::isfinite(points[q].imag()))
            throw std::invalid_argument("constellation: non-finite point");
        total += p;
        power += p * std::norm(points[q]);
    }
    if (std::abs(total - 1.0) > kInvariantTol)
        throw std::invalid_argument("constellation: probabilities sum to " + std::to_string(total));
    if (std::abs(power - 1.0) > kInvariantTol)
        throw std::invalid_argument("constellation: average power is " + std::to_string(power) +
                                    ", expected 1");
}

}  // namespace

ConstellationPoint ConstellationPoint::from_complex(cdouble z) {
    double phase = std::arg(z);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    if (phase >= 2.0 * std::numbers::pi) phase = 0.0;
    return {std::abs(z), phase};
}

cdouble ConstellationPoint::value() const { return std::polar(amplitude, phase); }

Constellation::Constellation(std::vector<cdouble> points, std::vector<double> probs)
    : points_(std::move(points)), probs_(std::move(probs)) {
    validate(points_, probs_);
    for (auto& p : probs_) p = std::clamp(p, 0.0, 1.0);
}

Constellation Constellation::normalized(std::vector<cdouble> points, std::vector<double> probs) {
    if (points.size() != probs.size())
        throw std::invalid_argument("constellation: points/probs length mismatch");
    double power = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q) power += probs[q] * std::norm(points[q]);
    if (!(power > 0.0)) throw std::invalid_argument("constellation: zero average power");
    const double scale = 1.0 / std::sqrt(power);
    for (auto& z : points) z *= scale;
    return Constellation(std::move(points), std::move(probs));
}

Constellation Constellation::with_probs(std::vector<double> probs) const {
    return Constellation(points_, std::move(probs));
}

std::vector<double> Constellation::energies() const {
    std::vector<double> e(points_.size());
    std::transform(points_.begin(), points_.end(), e.begin(), [](cdouble z) { return std::norm(z); });
    return e;
}

cdouble Constellation::mean() const {
    cdouble m{};
    for (std::size_t q = 0; q < points_.size(); ++q) m += probs_[q] * points_[q];
    return m;
}

bool Constellation::is_zero_mean(double tol) const { return std::abs(mean()) <= tol; }

Constellation make_psk(int order) {
    if (order < 2) throw std::invalid_argument("make_psk: order must be >= 2");
    std::vector<cdouble> points(static_cast<std::size_t>(order));
    for (int q = 0; q < order; ++q) {
        const double phase = 2.0 * std::numbers::pi * q / order;
        // exact values on the axes keep BPSK/QPSK free of 1e-16 residue
        if (4 * q % order == 0) {
            static constexpr cdouble axes[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            points[q] = axes[4 * q / order];
        } else {
            points[q] = std::polar(1.0, phase);
        }
    }
    std::vector<double> probs(points.size(), 1.0 / order);
    return Constellation(std::move(points), std::move(probs));
}

Constellation make_qam(int order) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (order < 4 || side * side != order || side % 2 != 0)
        throw std::invalid_argument("make_qam: order must be the square of an even integer, got " +
                                    std::to_string(order));

    // mean of (a^2 + b^2) over the odd grid {+-1, +-3, ...}^2 is 2 (side^2 - 1) / 3
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
    std::vector<cdouble> points;
    points.reserve(static_cast<std::size_t>(order));
    for (int i = 0; i < side; ++i) {
        for (int r = 0; r < side; ++r) {
            points.emplace_back((2 * r - side + 1) * scale, (2 * i - side + 1) * scale);
        }
    }
    std::vector<double> probs(points.size(), 1.0 / order);
    return Constellation(std::move(points), std::move(probs));
}

double moment(const Constellation& c, int k) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("moment: order must be even and >= 2");
    const auto pts = c.points();
    const auto p = c.probs();
    double m = 0.0;
    for (std::size_t q = 0; q < c.size(); ++q) m += p[q] * std::pow(std::norm(pts[q]), k / 2);
    return m;
}

double entropy_bits(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

std::vector<cdouble> sample_symbols(const Constellation& c, std::size_t n, Generator& gen) {
    const auto p = c.probs();
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] <= 0.0) --last;

    const auto pts = c.points();
    std::vector<cdouble> out(n);
    for (auto& s : out) {
        const double u = uniform01(gen);
        auto q = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        s = pts[std::min(q, last)];
    }
    return out;
}

std::vector<cdouble> sample_symbols(const Constellation& c, std::size_t n, Seed seed) {
    auto gen = make_stream(seed, StreamTag::symbols);
    return sample_symbols(c, n, gen);
}

std::vector<EnergyRing> energy_rings(std::span<const double> energies, double tol) {
    std::vector<std::size_t> order(energies.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });

    std::vector<EnergyRing> rings;
    for (std::size_t q : order) {
        if (rings.empty() || energies[q] - rings.back().energy > tol) {
            rings.push_back({energies[q], {}});
        }
        rings.back().members.push_back(q);
    }
    for (auto& r : rings) std::sort(r.members.begin(), r.members.end());
    return rings;
}

nlohmann::json to_json(const Constellation& c) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& z : c.points()) points.push_back({{"re", z.real()}, {"im", z.imag()}});
    return {{"points", std::move(points)},
            {"probs", std::vector<double>(c.probs().begin(), c.probs().end())}};
}

Constellation constellation_from_json(const nlohmann::json& j) {
    if (!j.contains("points") || !j.contains("probs"))
        throw std::invalid_argument("constellation json: expected \"points\" and \"probs\"");
    std::vector<cdouble> points;
    for (const auto& pt : j.at("points")) points.emplace_back(pt.at("re").get<double>(), pt.at("im").get<double>());
    return Constellation(std::move(points), j.at("probs").get<std::vector<double>>());
}

}  // namespace pcsisac
