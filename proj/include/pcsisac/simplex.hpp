#pragma once

#include <vector>

namespace pcsisac {

/// minimize cost . x  subject to  eq_rows x = eq_rhs,  le_rows x <= le_rhs,  x >= 0
struct LinearProgram {
    std::vector<double> cost;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

struct LpOptions {
    int max_iterations = 20000;
    double pivot_tol = 1e-12;
    double feasibility_tol = 1e-10;
};

/// Dense two-phase simplex with Bland's anti-cycling rule. The final basic
/// solution is recomputed from the original constraint columns by a pivoted
/// linear solve, so rounding from the tableau updates does not accumulate.
/// Throws SolverNotConverged when max_iterations is exceeded.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace pcsisac
