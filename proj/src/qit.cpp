#include "repval/qit.hpp"

#include <algorithm>
#include <cmath>

namespace repval {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double fidelity(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw DimensionError("fidelity: dimension mismatch");
    const Matrix sr = matrix_function_psd(rho, [](double x) { return std::sqrt(x); }, true);
    const Matrix m = sr * sigma * sr;
    Eig e = hermitian_eig((m + m.adjoint()) / 2.0);
    double f = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) f += std::sqrt(std::max(0.0, e.values(i)));
    return f;
}

double pure_fidelity(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("pure_fidelity: dimension mismatch");
    return std::abs(a.dot(b));
}

double bures_sq(const Matrix& rho, const Matrix& sigma) { return 1.0 - fidelity(rho, sigma); }

double binary_bures_sq(double p, double q) {
    p = clamp01(p);
    q = clamp01(q);
    return 1.0 - (std::sqrt(p * q) + std::sqrt((1 - p) * (1 - q)));
}

double entropy(const Matrix& rho) {
    Eig e = hermitian_eig(rho);
    double h = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        const double lam = e.values(i);
        if (lam > kEigenZeroCutoff) h -= lam * std::log2(lam);
    }
    return h;
}

double relative_entropy(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows()) throw DimensionError("relative_entropy: dimension mismatch");
    Eig er = hermitian_eig(rho);
    Eig es = hermitian_eig(sigma);
    // mass of rho outside supp(sigma)
    double outside = 0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        if (es.values(i) > kEigenZeroCutoff) continue;
        outside += (es.vectors.col(i).adjoint() * rho * es.vectors.col(i))(0).real();
    }
    if (outside > 1e-10) return kInf;
    double s = 0;
    for (Eigen::Index j = 0; j < er.values.size(); ++j) {
        const double r = er.values(j);
        if (r <= kEigenZeroCutoff) continue;
        s += r * std::log2(r);
        for (Eigen::Index i = 0; i < es.values.size(); ++i) {
            const double w = es.values(i);
            if (w <= kEigenZeroCutoff) continue;
            const double overlap = std::norm(es.vectors.col(i).dot(er.vectors.col(j)));
            s -= r * overlap * std::log2(w);
        }
    }
    return s;
}

double binary_relative_entropy(double p, double q) {
    p = clamp01(p);
    q = clamp01(q);
    auto term = [](double a, double b) {
        if (a <= 0) return 0.0;
        if (b <= 0) return kInf;
        return a * std::log2(a / b);
    };
    return term(p, q) + term(1 - p, 1 - q);
}

double relative_min_entropy(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows()) throw DimensionError("relative_min_entropy: dimension mismatch");
    Eig es = hermitian_eig(sigma);
    double outside = 0;
    Matrix inv_sqrt = Matrix::Zero(sigma.rows(), sigma.cols());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        const double w = es.values(i);
        if (w > kEigenZeroCutoff) {
            inv_sqrt += (1.0 / std::sqrt(w)) * es.vectors.col(i) * es.vectors.col(i).adjoint();
        } else {
            outside += (es.vectors.col(i).adjoint() * rho * es.vectors.col(i))(0).real();
        }
    }
    if (outside > 1e-10) return kInf;
    const Matrix sandwich = inv_sqrt * rho * inv_sqrt;
    Eig e = hermitian_eig((sandwich + sandwich.adjoint()) / 2.0);
    const double top = std::max(e.values(0), 0.0);
    if (top <= 0) return -kInf;
    return std::log2(top);
}

double mutual_information(const LabeledState& s, std::span<const std::string> a,
                          std::span<const std::string> b) {
    for (const auto& la : a)
        for (const auto& lb : b)
            if (la == lb) throw DimensionError("mutual_information: overlapping label '" + la + "'");
    std::vector<std::string> ab(a.begin(), a.end());
    ab.insert(ab.end(), b.begin(), b.end());
    const double hab = entropy(partial_trace(s, ab).dens());
    const double ha = entropy(partial_trace(s, a).dens());
    const double hb = entropy(partial_trace(s, b).dens());
    return ha + hb - hab;
}

double multipartite_mutual_information(const LabeledState& s,
                                       std::span<const std::vector<std::string>> parts) {
    std::vector<std::string> all;
    double sum = 0;
    for (const auto& part : parts) {
        for (const auto& l : part) {
            if (std::find(all.begin(), all.end(), l) != all.end())
                throw DimensionError("multipartite_mutual_information: overlapping label '" + l + "'");
            all.push_back(l);
        }
        sum += entropy(partial_trace(s, part).dens());
    }
    return sum - entropy(partial_trace(s, all).dens());
}

namespace {

// Reshape a pure state into the (local x rest) coefficient matrix, register
// blocks in layout order.
Matrix as_local_matrix(const LabeledState& s, std::span<const std::string> local) {
    const RegisterLayout& layout = s.layout();
    auto local_regs = layout.indices_of(local);
    std::sort(local_regs.begin(), local_regs.end());
    std::vector<std::size_t> rest;
    {
        std::vector<bool> in(layout.size(), false);
        for (auto r : local_regs) in[r] = true;
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (!in[i]) rest.push_back(i);
    }
    std::size_t L = 1, R = 1;
    for (auto r : local_regs) L *= layout.at(r).dim;
    for (auto r : rest) R *= layout.at(r).dim;

    auto offs = [&](const std::vector<std::size_t>& regs, std::size_t count) {
        std::vector<std::size_t> out(count, 0);
        for (std::size_t v = 0; v < count; ++v) {
            std::size_t rem = v, off = 0;
            for (std::size_t t = regs.size(); t-- > 0;) {
                const std::size_t d = layout.at(regs[t]).dim;
                off += (rem % d) * layout.stride(regs[t]);
                rem /= d;
            }
            out[v] = off;
        }
        return out;
    };
    const auto loff = offs(local_regs, L);
    const auto roff = offs(rest, R);
    const Vector& v = s.vec();
    Matrix m(L, R);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t r = 0; r < R; ++r) m(l, r) = v(loff[l] + roff[r]);
    return m;
}

}  // namespace

Matrix uhlmann_unitary(const LabeledState& phi_x, const LabeledState& phi,
                       std::span<const std::string> local) {
    if (!phi_x.is_pure() || !phi.is_pure())
        throw InvariantError("uhlmann_unitary: both states must be pure");
    const Matrix mx = as_local_matrix(phi_x, local);
    const Matrix m = as_local_matrix(phi, local);
    if (mx.rows() != m.rows() || mx.cols() != m.cols())
        throw DimensionError("uhlmann_unitary: layouts differ");
    // <phi_x| (U ox id) |phi> = tr(U m mx^dagger); maximize over unitary U.
    return polar_unitary(m * mx.adjoint());
}

double uhlmann_overlap(const LabeledState& phi_x, const LabeledState& phi,
                       std::span<const std::string> local) {
    const Matrix u = uhlmann_unitary(phi_x, phi, local);
    std::vector<std::string> loc(local.begin(), local.end());
    const LabeledState moved = apply_local_unitary(phi, u, loc);
    return std::abs(phi_x.vec().dot(moved.vec()));
}

RazBounds raz_check(const LabeledState& phi, const LabeledState& psi,
                    std::span<const std::string> x_labels,
                    std::span<const std::string> a_labels) {
    // hypothesis: psi = (ox_i diag mu_i) ox psi^A
    std::vector<std::string> xs(x_labels.begin(), x_labels.end());
    Matrix assembled = Matrix::Ones(1, 1);
    for (const auto& l : x_labels) {
        std::vector<std::string> one{l};
        Matrix mi = partial_trace(psi, one).dens();
        mi = Matrix((mi + mi.adjoint()) / 2.0).diagonal().real().cast<cxd>().asDiagonal();
        assembled = kron(assembled, mi);
    }
    std::vector<std::string> as(a_labels.begin(), a_labels.end());
    if (!as.empty()) assembled = kron(assembled, partial_trace(psi, as).dens());
    std::vector<std::string> xa = xs;
    xa.insert(xa.end(), as.begin(), as.end());
    const Matrix joint = partial_trace(psi, xa).dens();
    const double dev = (joint - assembled).cwiseAbs().maxCoeff();
    if (dev > 1e-8)
        throw InvariantError("raz_check: psi is not classical-product on X (deviation " +
                             std::to_string(dev) + ")");

    RazBounds out{0.0, 0.0};
    for (const auto& l : x_labels) {
        std::vector<std::string> one{l};
        out.lhs += mutual_information(phi, one, as);
    }
    const Matrix phi_xa = partial_trace(phi, xa).dens();
    out.rhs = 2.0 * relative_entropy(phi_xa, joint);
    return out;
}

}  // namespace repval
