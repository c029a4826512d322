#include "repval/simplex.hpp"

#include <cmath>
#include <limits>

#include "repval/errors.hpp"

namespace repval {

namespace {

constexpr double kPivotTol = 1e-9;

// Tableau rows: m constraint rows + 1 objective row (reduced costs, maximizing).
// Columns: all variables + 1 rhs column. Basis tracks the variable of each row.
struct Tableau {
    Eigen::MatrixXd t;
    std::vector<std::size_t> basis;
    std::size_t iterations = 0;

    std::size_t rows() const { return basis.size(); }
    std::size_t vars() const { return static_cast<std::size_t>(t.cols()) - 1; }

    void pivot(std::size_t row, std::size_t col) {
        t.row(row) /= t(row, col);
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            if (static_cast<std::size_t>(r) == row) continue;
            const double f = t(r, col);
            if (f != 0.0) t.row(r) -= f * t.row(row);
        }
        basis[row] = col;
    }

    // Bland's rule: entering = lowest-index improving column, leaving = lowest
    // basis variable among the ratio-test minimizers.
    LpResult::Status run(std::size_t allowed, std::size_t max_iterations) {
        const std::size_t m = rows();
        for (;;) {
            if (max_iterations && iterations >= max_iterations)
                return LpResult::Status::IterationLimit;
            std::size_t enter = allowed;
            for (std::size_t c = 0; c < allowed; ++c) {
                if (t(m, c) > kPivotTol) {
                    enter = c;
                    break;
                }
            }
            if (enter == allowed) return LpResult::Status::Optimal;
            std::size_t leave = m;
            double best_ratio = std::numeric_limits<double>::infinity();
            std::size_t best_var = std::numeric_limits<std::size_t>::max();
            for (std::size_t r = 0; r < m; ++r) {
                const double coef = t(r, enter);
                if (coef <= kPivotTol) continue;
                const double ratio = t(r, vars()) / coef;
                if (ratio < best_ratio - kPivotTol ||
                    (ratio < best_ratio + kPivotTol && basis[r] < best_var)) {
                    best_ratio = ratio;
                    best_var = basis[r];
                    leave = r;
                }
            }
            if (leave == m) return LpResult::Status::Unbounded;
            pivot(leave, enter);
            ++iterations;
        }
    }
};

}  // namespace

LpResult simplex_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, std::size_t max_iterations) {
    const std::size_t m = static_cast<std::size_t>(a.rows());
    const std::size_t n = static_cast<std::size_t>(a.cols());
    if (static_cast<std::size_t>(b.size()) != m || static_cast<std::size_t>(c.size()) != n)
        throw DimensionError("simplex: shape mismatch");
    check_alloc((m + 1) * (n + m + 1) * sizeof(double), "simplex tableau");
    if (max_iterations == 0) max_iterations = 50000 + 200 * (m + n);

    // Phase 1: artificial basis.
    Tableau tab;
    tab.t.setZero(m + 1, n + m + 1);
    tab.basis.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = b(r) < 0 ? -1.0 : 1.0;
        tab.t.block(r, 0, 1, n) = sign * a.row(r);
        tab.t(r, n + r) = 1.0;
        tab.t(r, n + m) = sign * b(r);
        tab.basis[r] = n + r;
    }
    // maximize -(sum of artificials): objective row = sum of constraint rows
    // over the structural columns.
    for (std::size_t r = 0; r < m; ++r) {
        tab.t.row(m).head(n) += tab.t.row(r).head(n);
        tab.t(m, n + m) += tab.t(r, n + m);
    }

    LpResult out;
    auto status = tab.run(n, max_iterations);
    out.iterations = tab.iterations;
    if (status == LpResult::Status::IterationLimit) {
        out.status = status;
        return out;
    }
    if (tab.t(m, n + m) > 1e-7) {
        out.status = LpResult::Status::Infeasible;
        return out;
    }
    // Drive any artificial still in the basis out (degenerate rows).
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis[r] < n) continue;
        std::size_t col = n;
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
            if (std::abs(tab.t(r, cidx)) > kPivotTol) {
                col = cidx;
                break;
            }
        }
        if (col < n) tab.pivot(r, col);
        // else: the row is all zeros over structurals; harmless.
    }

    // Phase 2 objective.
    tab.t.row(m).setZero();
    for (std::size_t cidx = 0; cidx < n; ++cidx) tab.t(m, cidx) = c(cidx);
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis[r] < n) {
            const double coef = tab.t(m, tab.basis[r]);
            if (coef != 0.0) tab.t.row(m) -= coef * tab.t.row(r);
        }
    }
    // Artificial columns cannot re-enter: run() only admits columns below n.
    status = tab.run(n, max_iterations);
    out.iterations = tab.iterations;
    out.status = status;
    if (status != LpResult::Status::Optimal) return out;

    out.solution.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.basis[r] < n) out.solution[tab.basis[r]] = tab.t(r, n + m);
    double obj = 0;
    for (std::size_t cidx = 0; cidx < n; ++cidx) obj += c(cidx) * out.solution[cidx];
    out.objective = obj;
    return out;
}

}  // namespace repval
