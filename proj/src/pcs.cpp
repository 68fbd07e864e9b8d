#include "pcsisac/pcs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pcsisac/errors.hpp"
#include "pcsisac/simplex.hpp"

namespace pcsisac {

namespace {

constexpr double kSupportTol = 1e-12;
constexpr double kZeroRingTol = 1e-9;

std::vector<double> energies_of(std::span<const double> amplitudes) {
    if (amplitudes.empty()) throw std::invalid_argument("pcs: empty support");
    std::vector<double> e(amplitudes.size());
    for (std::size_t q = 0; q < amplitudes.size(); ++q) {
        const double a = amplitudes[q];
        if (!std::isfinite(a) || a < 0.0) throw std::invalid_argument("pcs: amplitudes must be finite and >= 0");
        e[q] = a * a;
    }
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    if (*lo > 1.0 + kSupportTol || *hi < 1.0 - kSupportTol)
        throw InfeasibleSupport("pcs: unit power is unreachable, energies span [" + std::to_string(*lo) +
                                ", " + std::to_string(*hi) + "]");
    return e;
}

double fourth_moment(std::span<const double> probs, std::span<const double> energies) {
    double m = 0.0;
    for (std::size_t q = 0; q < probs.size(); ++q) m += probs[q] * energies[q] * energies[q];
    return m;
}

// Extremes of sum m e^2 over {m >= 0, sum m = 1, sum m e = 1}.
FourthMomentRange range_from_energies(const std::vector<double>& e) {
    LinearProgram lp;
    lp.eq_rows = {std::vector<double>(e.size(), 1.0), e};
    lp.eq_rhs = {1.0, 1.0};
    std::vector<double> e2(e.size());
    std::transform(e.begin(), e.end(), e2.begin(), [](double v) { return v * v; });

    lp.cost = e2;
    const auto lo = solve_lp(lp);
    for (auto& v : lp.cost) v = -v;
    const auto hi = solve_lp(lp);
    if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal)
        throw InfeasibleSupport("pcs: fourth-moment range LP has no optimum");
    return {fourth_moment(lo.x, e), fourth_moment(hi.x, e)};
}

// Log-partition of the ring-level Gibbs family w_r exp(lambda . g_r).
struct GibbsState {
    double log_z = 0.0;
    std::vector<double> mass;
    std::array<double, 2> grad{};
    std::array<double, 4> hess{};  // row-major 2x2
};

GibbsState gibbs(const std::vector<double>& weight, const std::vector<std::array<double, 2>>& g,
                 const std::array<double, 2>& lambda) {
    GibbsState s;
    const std::size_t n = weight.size();
    std::vector<double> expo(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
        expo[r] = std::log(weight[r]) + lambda[0] * g[r][0] + lambda[1] * g[r][1];
        top = std::max(top, expo[r]);
    }
    double z = 0.0;
    s.mass.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        s.mass[r] = std::exp(expo[r] - top);
        z += s.mass[r];
    }
    s.log_z = top + std::log(z);
    for (auto& m : s.mass) m /= z;
    for (std::size_t r = 0; r < n; ++r) {
        s.grad[0] += s.mass[r] * g[r][0];
        s.grad[1] += s.mass[r] * g[r][1];
    }
    for (std::size_t r = 0; r < n; ++r) {
        const double d0 = g[r][0] - s.grad[0];
        const double d1 = g[r][1] - s.grad[1];
        s.hess[0] += s.mass[r] * d0 * d0;
        s.hess[1] += s.mass[r] * d0 * d1;
        s.hess[3] += s.mass[r] * d1 * d1;
    }
    s.hess[2] = s.hess[1];
    return s;
}

// Newton direction -H^+ grad using the symmetric 2x2 eigendecomposition.
std::array<double, 2> newton_direction(const GibbsState& s) {
    const double a = s.hess[0], b = s.hess[1], d = s.hess[3];
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), b);
    const std::array<double, 2> eig{mean + rad, mean - rad};
    std::array<std::array<double, 2>, 2> vec;
    if (std::abs(b) > 1e-300) {
        vec[0] = {eig[0] - d, b};
        vec[1] = {eig[1] - d, b};
    } else {
        vec[0] = a >= d ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
        vec[1] = a >= d ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
    }
    std::array<double, 2> dir{};
    const double cutoff = 1e-14 * std::max(1.0, std::abs(eig[0]));
    for (int k = 0; k < 2; ++k) {
        const double norm = std::hypot(vec[k][0], vec[k][1]);
        if (norm == 0.0 || eig[k] <= cutoff) continue;
        const double u0 = vec[k][0] / norm, u1 = vec[k][1] / norm;
        const double proj = (u0 * s.grad[0] + u1 * s.grad[1]) / eig[k];
        dir[0] -= proj * u0;
        dir[1] -= proj * u1;
    }
    return dir;
}

struct EntropyResult {
    std::vector<double> ring_mass;
    int iterations = 0;
};

// Maximum-entropy ring masses on {sum m = 1, sum m e = 1, sum m e^2 = target},
// with entropy counted over points (ring r contributes m_r log n_r extra).
EntropyResult max_entropy_rings(const std::vector<EnergyRing>& rings, double target) {
    const std::size_t n = rings.size();
    std::vector<double> e(n), e2(n);
    for (std::size_t r = 0; r < n; ++r) {
        e[r] = rings[r].energy;
        e2[r] = e[r] * e[r];
    }

    // rings that carry no mass anywhere on the face are pinned at zero
    LinearProgram lp;
    lp.eq_rows = {std::vector<double>(n, 1.0), e, e2};
    lp.eq_rhs = {1.0, 1.0, target};
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < n; ++r) {
        lp.cost.assign(n, 0.0);
        lp.cost[r] = -1.0;
        const auto sol = solve_lp(lp);
        if (sol.status != LpStatus::optimal)
            throw SolverNotConverged("pcs: optimal face is empty at the ring level", sol.iterations,
                                     std::numeric_limits<double>::quiet_NaN());
        if (sol.x[r] > kZeroRingTol) active.push_back(r);
    }
    if (active.empty()) throw SolverNotConverged("pcs: no ring can carry mass", 0, 0.0);

    std::vector<double> weight;
    std::vector<std::array<double, 2>> g;
    for (std::size_t r : active) {
        weight.push_back(static_cast<double>(rings[r].members.size()));
        g.push_back({e[r] - 1.0, e2[r] - target});
    }

    constexpr int kMaxIter = 500;
    constexpr double kGradTol = 1e-14;
    std::array<double, 2> lambda{};
    auto state = gibbs(weight, g, lambda);
    int it = 0;
    for (; it < kMaxIter; ++it) {
        if (std::max(std::abs(state.grad[0]), std::abs(state.grad[1])) < kGradTol) break;
        auto dir = newton_direction(state);
        double slope = dir[0] * state.grad[0] + dir[1] * state.grad[1];
        if (!(slope < 0.0)) {
            dir = {-state.grad[0], -state.grad[1]};
            slope = -(state.grad[0] * state.grad[0] + state.grad[1] * state.grad[1]);
        }
        double step = 1.0;
        GibbsState next;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            next = gibbs(weight, g, {lambda[0] + step * dir[0], lambda[1] + step * dir[1]});
            if (next.log_z <= state.log_z + 1e-4 * step * slope) break;
        }
        if (next.log_z > state.log_z) break;  // no further decrease at machine precision
        lambda = {lambda[0] + step * dir[0], lambda[1] + step * dir[1]};
        state = std::move(next);
    }
    const double residual = std::max(std::abs(state.grad[0]), std::abs(state.grad[1]));
    if (residual > 1e-10)
        throw SolverNotConverged("pcs: max-entropy stage did not converge", it, residual);

    EntropyResult out;
    out.iterations = it;
    out.ring_mass.assign(n, 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) out.ring_mass[active[k]] = state.mass[k];
    return out;
}

}  // namespace

PcsProblem PcsProblem::from(const Constellation& c, double c0) { return {pcsisac::amplitudes(c), c0}; }

std::vector<double> amplitudes(const Constellation& c) {
    std::vector<double> a(c.size());
    std::transform(c.points().begin(), c.points().end(), a.begin(), [](cdouble z) { return std::abs(z); });
    return a;
}

FourthMomentRange fourth_moment_range(std::span<const double> amplitudes) {
    return range_from_energies(energies_of(amplitudes));
}

PcsSolution solve_pcs(const PcsProblem& problem, TieBreak tie_break) {
    if (!std::isfinite(problem.c0) || problem.c0 < 0.0)
        throw std::invalid_argument("pcs: c0 must be finite and >= 0");
    const auto e = energies_of(problem.amplitudes);
    const std::size_t q_count = e.size();

    PcsSolution out;
    out.c0 = problem.c0;
    out.feasible_range = range_from_energies(e);

    // variables [p_0 .. p_{Q-1}, t]
    LinearProgram lp;
    lp.cost.assign(q_count + 1, 0.0);
    lp.cost[q_count] = 1.0;
    std::vector<double> ones(q_count + 1, 1.0), power(q_count + 1), m4(q_count + 1), neg_m4(q_count + 1);
    ones[q_count] = 0.0;
    for (std::size_t q = 0; q < q_count; ++q) {
        power[q] = e[q];
        m4[q] = e[q] * e[q];
        neg_m4[q] = -m4[q];
    }
    power[q_count] = 0.0;
    m4[q_count] = -1.0;
    neg_m4[q_count] = -1.0;
    lp.eq_rows = {ones, power};
    lp.eq_rhs = {1.0, 1.0};
    lp.le_rows = {m4, neg_m4};
    lp.le_rhs = {problem.c0, -problem.c0};

    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw InfeasibleSupport("pcs: epigraph LP has no optimum");
    out.lp_iterations = sol.iterations;
    out.probs.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(q_count));

    if (tie_break == TieBreak::max_entropy) {
        const double face_m4 = fourth_moment(out.probs, e);
        const auto rings = energy_rings(e);
        const auto ent = max_entropy_rings(rings, face_m4);
        out.entropy_iterations = ent.iterations;
        for (std::size_t r = 0; r < rings.size(); ++r) {
            const double each = ent.ring_mass[r] / static_cast<double>(rings[r].members.size());
            for (std::size_t q : rings[r].members) out.probs[q] = each;
        }
    }

    out.achieved_m4 = fourth_moment(out.probs, e);
    out.gap = std::abs(out.achieved_m4 - problem.c0);
    out.entropy_bits = entropy_bits(out.probs);
    return out;
}

std::vector<PcsSolution> sweep_c0(std::span<const double> amplitudes, std::span<const double> c0_grid,
                                  TieBreak tie_break) {
    if (c0_grid.empty()) throw std::invalid_argument("sweep_c0: empty grid");
    std::vector<PcsSolution> out;
    out.reserve(c0_grid.size());
    PcsProblem problem{{amplitudes.begin(), amplitudes.end()}, 0.0};
    for (double c0 : c0_grid) {
        problem.c0 = c0;
        out.push_back(solve_pcs(problem, tie_break));
    }
    return out;
}

Constellation shaped(const Constellation& base, const PcsSolution& solution) {
    return base.with_probs(solution.probs);
}

}  // namespace pcsisac
