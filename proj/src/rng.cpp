#include "repval/rng.hpp"

#include <cmath>

namespace repval {

Eigen::VectorXcd random_pure_state(std::size_t dim, Rng& rng) {
    Eigen::VectorXcd v(dim);
    for (std::size_t i = 0; i < dim; ++i) v(i) = rng.cnormal();
    return v / v.norm();
}

Eigen::MatrixXcd random_density(std::size_t dim, std::size_t rank, Rng& rng) {
    Eigen::MatrixXcd g(dim, rank);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < rank; ++j) g(i, j) = rng.cnormal();
    Eigen::MatrixXcd rho = g * g.adjoint();
    return rho / rho.trace().real();
}

Eigen::MatrixXcd random_hermitian(std::size_t dim, Rng& rng) {
    Eigen::MatrixXcd g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
    return (g + g.adjoint()) / 2.0;
}

Eigen::MatrixXcd random_unitary(std::size_t dim, Rng& rng) {
    Eigen::MatrixXcd g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix phases so the distribution is Haar
    for (std::size_t j = 0; j < dim; ++j) {
        const auto d = r(j, j);
        q.col(j) *= (std::abs(d) > 0 ? d / std::abs(d) : 1.0);
    }
    return q;
}

Eigen::MatrixXcd random_isometry(std::size_t in_dim, std::size_t env_dim, Rng& rng) {
    const std::size_t out_dim = in_dim * env_dim;
    Eigen::MatrixXcd u = random_unitary(out_dim, rng);
    return u.leftCols(in_dim);
}

std::vector<double> random_distribution(std::size_t n, Rng& rng) {
    std::vector<double> p(n);
    double tot = 0;
    for (auto& v : p) {
        v = -std::log(std::max(rng.uniform(), 1e-300));
        tot += v;
    }
    for (auto& v : p) v /= tot;
    return p;
}

}  // namespace repval
