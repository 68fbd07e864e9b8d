#include "pcsisac/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "pcsisac/errors.hpp"

namespace pcsisac {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> solve_dense(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14) return std::nullopt;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

class Tableau {
public:
    Tableau(const LinearProgram& lp, const LpOptions& opt) : opt_(opt) {
        num_vars_ = lp.cost.size();
        const std::size_t m_eq = lp.eq_rows.size();
        const std::size_t m_le = lp.le_rows.size();
        if (lp.eq_rhs.size() != m_eq || lp.le_rhs.size() != m_le)
            throw std::invalid_argument("solve_lp: row/rhs count mismatch");
        rows_ = m_eq + m_le;
        num_struct_ = num_vars_ + m_le;  // structural + slack columns
        cols_ = num_struct_ + rows_;     // + one artificial per row
        rhs_col_ = cols_;

        // standard-form constraint matrix with nonnegative rhs, kept for refinement
        a_.assign(rows_, std::vector<double>(num_struct_, 0.0));
        b_.assign(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const bool eq = i < m_eq;
            const auto& src = eq ? lp.eq_rows[i] : lp.le_rows[i - m_eq];
            if (src.size() != num_vars_) throw std::invalid_argument("solve_lp: row width mismatch");
            std::copy(src.begin(), src.end(), a_[i].begin());
            b_[i] = eq ? lp.eq_rhs[i] : lp.le_rhs[i - m_eq];
            if (!eq) a_[i][num_vars_ + (i - m_eq)] = 1.0;
            if (b_[i] < 0.0) {
                for (auto& v : a_[i]) v = -v;
                b_[i] = -b_[i];
            }
        }

        t_.assign(rows_, std::vector<double>(cols_ + 1, 0.0));
        basis_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            std::copy(a_[i].begin(), a_[i].end(), t_[i].begin());
            t_[i][num_struct_ + i] = 1.0;
            t_[i][rhs_col_] = b_[i];
            basis_[i] = num_struct_ + i;
        }
        active_.assign(rows_, true);
    }

    LpSolution solve(const std::vector<double>& cost) {
        LpSolution out;

        // phase 1: minimize the sum of artificials
        z_.assign(cols_ + 1, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j <= cols_; ++j)
                if (j < num_struct_ || j == rhs_col_) z_[j] -= t_[i][j];
        if (!iterate(cols_, out.iterations)) throw std::logic_error("phase 1 cannot be unbounded");
        if (-z_[rhs_col_] > opt_.feasibility_tol * std::max(1.0, max_rhs())) {
            out.status = LpStatus::infeasible;
            return out;
        }
        evict_artificials();

        // phase 2
        z_.assign(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < num_vars_; ++j) z_[j] = cost[j];
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!active_[i]) continue;
            const double cb = basis_[i] < num_vars_ ? cost[basis_[i]] : 0.0;
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) z_[j] -= cb * t_[i][j];
        }
        if (!iterate(num_struct_, out.iterations)) {
            out.status = LpStatus::unbounded;
            return out;
        }

        out.status = LpStatus::optimal;
        out.x = extract();
        out.objective = std::inner_product(cost.begin(), cost.end(), out.x.begin(), 0.0);
        return out;
    }

private:
    double max_rhs() const {
        double m = 0.0;
        for (double v : b_) m = std::max(m, std::abs(v));
        return m;
    }

    // Pivots until optimal over columns [0, allowed); false when unbounded.
    bool iterate(std::size_t allowed, int& iterations) {
        for (;;) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (z_[j] < -opt_.pivot_tol * 10.0) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return true;

            std::size_t leave = rows_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!active_[i] || t_[i][enter] <= opt_.pivot_tol) continue;
                const double ratio = t_[i][rhs_col_] / t_[i][enter];
                const bool better = ratio < best - 1e-15;
                const bool tie = !better && ratio <= best + 1e-15 && basis_[i] < basis_[leave];
                if (better || tie) {
                    best = better ? ratio : best;
                    leave = i;
                }
            }
            if (leave == rows_) return false;

            if (++iterations > opt_.max_iterations)
                throw SolverNotConverged("simplex iteration cap exceeded", iterations,
                                         -z_[rhs_col_]);
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double inv = 1.0 / t_[row][col];
        for (auto& v : t_[row]) v *= inv;
        t_[row][col] = 1.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == row || !active_[i]) continue;
            const double f = t_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[row][j];
            t_[i][col] = 0.0;
        }
        const double f = z_[col];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) z_[j] -= f * t_[row][j];
            z_[col] = 0.0;
        }
        basis_[row] = col;
    }

    void evict_artificials() {
        for (std::size_t i = 0; i < rows_; ++i) {
            if (basis_[i] < num_struct_) continue;
            std::size_t col = num_struct_;
            for (std::size_t j = 0; j < num_struct_; ++j) {
                if (std::abs(t_[i][j]) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col == num_struct_) {
                active_[i] = false;  // redundant row
            } else {
                pivot(i, col);
            }
        }
    }

    std::vector<double> extract() const {
        std::vector<double> x(num_struct_, 0.0);
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < rows_; ++i)
            if (active_[i]) live.push_back(i);

        Matrix basis_matrix(live.size(), std::vector<double>(live.size()));
        std::vector<double> rhs(live.size());
        for (std::size_t r = 0; r < live.size(); ++r) {
            rhs[r] = b_[live[r]];
            for (std::size_t c = 0; c < live.size(); ++c)
                basis_matrix[r][c] = a_[live[r]][basis_[live[c]]];
        }
        auto refined = solve_dense(std::move(basis_matrix), std::move(rhs));
        for (std::size_t c = 0; c < live.size(); ++c) {
            const double v = refined ? (*refined)[c] : t_[live[c]][rhs_col_];
            x[basis_[live[c]]] = std::max(0.0, v);
        }
        x.resize(num_vars_);
        return x;
    }

    LpOptions opt_;
    std::size_t num_vars_ = 0, num_struct_ = 0, rows_ = 0, cols_ = 0, rhs_col_ = 0;
    Matrix a_;
    std::vector<double> b_;
    Matrix t_;
    std::vector<double> z_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
    Tableau tableau(lp, options);
    return tableau.solve(lp.cost);
}

}  // namespace pcsisac
