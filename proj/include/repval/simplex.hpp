#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace repval {

struct LpResult {
    enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
    Status status = Status::Optimal;
    double objective = 0.0;
    std::vector<double> solution;
    std::size_t iterations = 0;
};

// maximize c.x subject to A x = b, x >= 0 (b may have any sign; rows are
// flipped internally). Dense two-phase primal simplex, Bland's rule, pivot
// tolerance 1e-9.
LpResult simplex_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, std::size_t max_iterations = 0);

}  // namespace repval
