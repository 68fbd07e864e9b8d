#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "pcsisac/rng.hpp"

namespace pcsisac {

using cdouble = std::complex<double>;

/// Polar view of one constellation point: A e^{j psi}.
struct ConstellationPoint {
    double amplitude = 0.0;  // >= 0
    double phase = 0.0;      // [0, 2pi)

    static ConstellationPoint from_complex(cdouble z);
    cdouble value() const;
};

/// Points sharing one energy level A^2.
struct EnergyRing {
    double energy = 0.0;
    std::vector<std::size_t> members;
};

/// Discrete complex constellation with point probabilities.
///
/// Construction enforces the simplex (sum p = 1, p in [0, 1]) and unit average
/// power (sum p |x|^2 = 1), both within 1e-9. Zero probabilities are allowed.
/// Zero mean is not enforced; query it with is_zero_mean().
class Constellation {
public:
    Constellation(std::vector<cdouble> points, std::vector<double> probs);

    /// Scales `points` so the average power under `probs` is one.
    static Constellation normalized(std::vector<cdouble> points, std::vector<double> probs);

    /// Same points, new probabilities (validated again).
    Constellation with_probs(std::vector<double> probs) const;

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const cdouble> points() const noexcept { return points_; }
    std::span<const double> probs() const noexcept { return probs_; }
    ConstellationPoint point(std::size_t q) const { return ConstellationPoint::from_complex(points_.at(q)); }

    /// Energies |x_q|^2 in point order.
    std::vector<double> energies() const;

    cdouble mean() const;
    bool is_zero_mean(double tol = 1e-9) const;

private:
    std::vector<cdouble> points_;
    std::vector<double> probs_;
};

/// Unit-amplitude PSK, phases 2 pi q / order, uniform probabilities.
Constellation make_psk(int order);

/// Square QAM on the odd-integer grid, row-major (imaginary part outer,
/// ascending), scaled to unit power under uniform probabilities.
Constellation make_qam(int order);

/// sum_q p_q A_q^k for even k >= 2.
double moment(const Constellation& c, int k);

double entropy_bits(std::span<const double> probs);
inline double entropy_bits(const Constellation& c) { return entropy_bits(c.probs()); }

/// n i.i.d. draws from the point distribution.
std::vector<cdouble> sample_symbols(const Constellation& c, std::size_t n, Seed seed);
std::vector<cdouble> sample_symbols(const Constellation& c, std::size_t n, Generator& gen);

/// Groups points by energy (tolerance `tol`), rings ordered by ascending energy.
std::vector<EnergyRing> energy_rings(std::span<const double> energies, double tol = 1e-9);
inline std::vector<EnergyRing> energy_rings(const Constellation& c, double tol = 1e-9) {
    return energy_rings(c.energies(), tol);
}

/// {"points": [{"re": .., "im": ..}, ...], "probs": [...]}
nlohmann::json to_json(const Constellation& c);
Constellation constellation_from_json(const nlohmann::json& j);

}  // namespace pcsisac
