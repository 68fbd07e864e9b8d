#include <array>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "pcsisac/rng.hpp"
#include "pcsisac/simplex.hpp"

using namespace pcsisac;

namespace {

// min c.x over {A x <= b, x >= 0} in 2-D by enumerating all constraint-line
// intersections (including the axes).
double brute_force_2d(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                      const std::vector<double>& b) {
    std::vector<std::array<double, 3>> lines;  // l0 x + l1 y = l2
    for (std::size_t i = 0; i < a.size(); ++i) lines.push_back({a[i][0], a[i][1], b[i]});
    lines.push_back({1, 0, 0});
    lines.push_back({0, 1, 0});
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const auto& p = lines[i];
            const auto& q = lines[j];
            const double det = p[0] * q[1] - p[1] * q[0];
            if (std::abs(det) < 1e-12) continue;
            const double x = (p[2] * q[1] - p[1] * q[2]) / det;
            const double y = (p[0] * q[2] - p[2] * q[0]) / det;
            if (x < -1e-9 || y < -1e-9) continue;
            bool ok = true;
            for (std::size_t r = 0; r < a.size(); ++r) ok = ok && a[r][0] * x + a[r][1] * y <= b[r] + 1e-9;
            if (ok) best = std::min(best, c[0] * x + c[1] * y);
        }
    return best;
}

}  // namespace

TEST_SUITE("simplex") {
    TEST_CASE("textbook LP") {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        LinearProgram lp{{-3, -5}, {}, {}, {{1, 0}, {0, 2}, {3, 2}}, {4, 12, 18}};
        const auto s = solve_lp(lp);
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.x[0] == doctest::Approx(2.0));
        CHECK(s.x[1] == doctest::Approx(6.0));
        CHECK(s.objective == doctest::Approx(-36.0));
    }

    TEST_CASE("equality rows, redundant rows and negative right-hand sides") {
        LinearProgram lp;
        lp.cost = {1, 2, 3};
        lp.eq_rows = {{1, 1, 1}, {2, 2, 2}};  // second row repeats the first
        lp.eq_rhs = {1, 2};
        lp.le_rows = {{-1, 0, 0}};
        lp.le_rhs = {-0.25};  // x0 >= 0.25
        const auto s = solve_lp(lp);
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.x[0] == doctest::Approx(1.0));
        CHECK(s.objective == doctest::Approx(1.0));
    }

    TEST_CASE("infeasible and unbounded programs are reported") {
        LinearProgram infeasible{{1, 1}, {{1, 1}}, {1}, {{1, 1}}, {0.5}};
        CHECK(solve_lp(infeasible).status == LpStatus::infeasible);
        LinearProgram unbounded{{-1, 0}, {}, {}, {{0, 1}}, {1}};
        CHECK(solve_lp(unbounded).status == LpStatus::unbounded);
    }

    TEST_CASE("row width mismatch is rejected") {
        LinearProgram bad{{1, 1}, {{1}}, {1}, {}, {}};
        CHECK_THROWS_AS(solve_lp(bad), std::invalid_argument);
    }

    TEST_CASE("degenerate vertex does not cycle") {
        // classic Beale-style degeneracy: many constraints through the origin
        LinearProgram lp{{-0.75, 150, -0.02, 6},
                         {},
                         {},
                         {{0.25, -60, -0.04, 9}, {0.5, -90, -0.02, 3}, {0, 0, 1, 0}},
                         {0, 0, 1}};
        const auto s = solve_lp(lp);
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.objective == doctest::Approx(-0.05));
    }

    TEST_CASE("random 2-D programs agree with vertex enumeration") {
        auto gen = make_stream(3, StreamTag::symbols);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<std::vector<double>> a{{1, 1}};
            std::vector<double> b{10};
            for (int r = 0; r < 4; ++r) {
                a.push_back({4 * uniform01(gen) - 2, 4 * uniform01(gen) - 2});
                b.push_back(1 + 5 * uniform01(gen));
            }
            const std::vector<double> c{4 * uniform01(gen) - 2, 4 * uniform01(gen) - 2};
            const auto s = solve_lp({c, {}, {}, a, b});
            REQUIRE(s.status == LpStatus::optimal);
            CHECK(s.objective == doctest::Approx(brute_force_2d(c, a, b)).epsilon(1e-9));
        }
    }
}
