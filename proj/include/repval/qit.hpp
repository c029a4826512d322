#pragma once

#include <limits>
#include <span>
#include <string>

#include "repval/qmat.hpp"

namespace repval {

// Relative (min-)entropies return +infinity on support violations so that
// conditioning pipelines can detect them without exception plumbing.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// tr sqrt(sqrt(rho) sigma sqrt(rho)); accepts any PSD operators.
double fidelity(const Matrix& rho, const Matrix& sigma);
double pure_fidelity(const Vector& a, const Vector& b);  // |<a|b>|

// Squared Bures metric 1 - F.
double bures_sq(const Matrix& rho, const Matrix& sigma);
double binary_bures_sq(double p, double q);  // between (p,1-p) and (q,1-q)

// All entropies are in bits.
double entropy(const Matrix& rho);
double relative_entropy(const Matrix& rho, const Matrix& sigma);
double binary_relative_entropy(double p, double q);
// log2 of the largest eigenvalue of sigma^{-1/2} rho sigma^{-1/2} on the
// support of sigma; +inf when supp(rho) is not contained in supp(sigma).
double relative_min_entropy(const Matrix& rho, const Matrix& sigma);

double mutual_information(const LabeledState& s, std::span<const std::string> a,
                          std::span<const std::string> b);
double multipartite_mutual_information(const LabeledState& s,
                                       std::span<const std::vector<std::string>> parts);

// Unitary on the `local` registers maximizing |<phi_x| (U ox id) |phi>|;
// the achieved overlap equals the fidelity of the complementary marginals.
Matrix uhlmann_unitary(const LabeledState& phi_x, const LabeledState& phi,
                       std::span<const std::string> local);
double uhlmann_overlap(const LabeledState& phi_x, const LabeledState& phi,
                       std::span<const std::string> local);

struct RazBounds {
    double lhs;  // sum_i I(X_i : A)
    double rhs;  // 2 S(phi || psi)
};
// psi must be classical and product across the X registers and in product
// with its remaining part.
RazBounds raz_check(const LabeledState& phi, const LabeledState& psi,
                    std::span<const std::string> x_labels,
                    std::span<const std::string> a_labels);

}  // namespace repval
