#include "repval/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace repval {

Matrix kron(const Matrix& a, const Matrix& b) {
    check_alloc(sizeof(cxd) * a.rows() * b.rows() * a.cols() * b.cols(), "kron");
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

RegisterLayout::RegisterLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    std::set<std::string> seen;
    for (const auto& r : regs_) {
        if (r.dim == 0) throw DimensionError("register '" + r.label + "' has dimension 0");
        if (!seen.insert(r.label).second)
            throw DimensionError("duplicate register label '" + r.label + "'");
    }
    strides_.assign(regs_.size(), 1);
    for (std::size_t i = regs_.size(); i-- > 0;) {
        if (i + 1 < regs_.size()) strides_[i] = strides_[i + 1] * regs_[i + 1].dim;
    }
    total_ = regs_.empty() ? 1 : strides_[0] * regs_[0].dim;
}

bool RegisterLayout::has(std::string_view label) const {
    for (const auto& r : regs_)
        if (r.label == label) return true;
    return false;
}

std::size_t RegisterLayout::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
        if (regs_[i].label == label) return i;
    throw DimensionError("unknown register label '" + std::string(label) + "'");
}

std::vector<std::size_t> RegisterLayout::indices_of(std::span<const std::string> labels) const {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(index_of(l));
    return out;
}

RegisterLayout RegisterLayout::subset(std::span<const std::size_t> reg_indices) const {
    std::vector<Register> regs;
    regs.reserve(reg_indices.size());
    for (auto i : reg_indices) regs.push_back(regs_[i]);
    return RegisterLayout(std::move(regs));
}

RegisterLayout tensor(const RegisterLayout& a, const RegisterLayout& b) {
    std::vector<Register> regs = a.registers();
    for (const auto& r : b.registers()) {
        if (a.has(r.label)) throw DimensionError("label collision on '" + r.label + "'");
        regs.push_back(r);
    }
    return RegisterLayout(std::move(regs));
}

LabeledState LabeledState::pure(RegisterLayout layout, Vector v) {
    if (static_cast<std::size_t>(v.size()) != layout.total_dim())
        throw DimensionError("state vector length does not match layout dimension");
    LabeledState s;
    s.layout_ = std::move(layout);
    s.pure_ = std::move(v);
    return s;
}

LabeledState LabeledState::density(RegisterLayout layout, Matrix rho) {
    if (static_cast<std::size_t>(rho.rows()) != layout.total_dim() || rho.rows() != rho.cols())
        throw DimensionError("density matrix shape does not match layout dimension");
    LabeledState s;
    s.layout_ = std::move(layout);
    s.dens_ = std::move(rho);
    return s;
}

const Vector& LabeledState::vec() const {
    if (!pure_) throw InvariantError("state is not pure");
    return *pure_;
}

const Matrix& LabeledState::dens() const {
    if (!dens_) throw InvariantError("state is not a density operator");
    return *dens_;
}

Matrix LabeledState::density_matrix() const {
    if (dens_) return *dens_;
    check_alloc(sizeof(cxd) * pure_->size() * pure_->size(), "density_matrix");
    return (*pure_) * pure_->adjoint();
}

double LabeledState::trace() const {
    if (pure_) return pure_->squaredNorm();
    return dens_->trace().real();
}

LabeledState LabeledState::normalized() const {
    const double t = trace();
    if (t <= 0) throw ZeroProbabilityEvent("cannot normalize a zero state");
    if (pure_) return pure(layout_, *pure_ / std::sqrt(t));
    return density(layout_, *dens_ / t);
}

LabeledState tensor_product(const LabeledState& a, const LabeledState& b) {
    RegisterLayout layout = tensor(a.layout(), b.layout());
    if (a.is_pure() && b.is_pure()) return LabeledState::pure(std::move(layout), kron(a.vec(), b.vec()));
    return LabeledState::density(std::move(layout), kron(a.density_matrix(), b.density_matrix()));
}

namespace {

// Composite offsets of every assignment of the given registers, layout order.
std::vector<std::size_t> offsets_for(const RegisterLayout& layout,
                                     const std::vector<std::size_t>& regs) {
    std::size_t n = 1;
    for (auto r : regs) n *= layout.at(r).dim;
    std::vector<std::size_t> out(n, 0);
    check_alloc(out.size() * sizeof(std::size_t), "index table");
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t rem = v, off = 0;
        for (std::size_t t = regs.size(); t-- > 0;) {
            const std::size_t d = layout.at(regs[t]).dim;
            off += (rem % d) * layout.stride(regs[t]);
            rem /= d;
        }
        out[v] = off;
    }
    return out;
}

std::vector<std::size_t> complement_regs(const RegisterLayout& layout,
                                         const std::vector<std::size_t>& regs) {
    std::vector<bool> in(layout.size(), false);
    for (auto r : regs) in[r] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

void sort_to_layout_order(std::vector<std::size_t>& regs) { std::sort(regs.begin(), regs.end()); }

}  // namespace

LabeledState partial_trace(const LabeledState& s, std::span<const std::string> keep) {
    const RegisterLayout& layout = s.layout();
    auto keep_regs = layout.indices_of(keep);
    sort_to_layout_order(keep_regs);
    auto traced = complement_regs(layout, keep_regs);

    const auto koff = offsets_for(layout, keep_regs);
    const auto toff = offsets_for(layout, traced);
    const std::size_t K = koff.size();
    check_alloc(sizeof(cxd) * K * K, "partial_trace");
    Matrix out = Matrix::Zero(K, K);

    if (s.is_pure()) {
        const Vector& v = s.vec();
        Vector sub(K);
        for (std::size_t t : toff) {
            for (std::size_t i = 0; i < K; ++i) sub(i) = v(koff[i] + t);
            out.noalias() += sub * sub.adjoint();
        }
    } else {
        const Matrix& rho = s.dens();
        for (std::size_t t : toff)
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < K; ++j) out(i, j) += rho(koff[i] + t, koff[j] + t);
    }
    return LabeledState::density(layout.subset(keep_regs), std::move(out));
}

Eig hermitian_eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("hermitian_eig: matrix not square");
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTol)
        throw InvariantError("hermitian_eig: input deviates from Hermitian by " + std::to_string(dev));
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    Eig e;
    const auto n = m.rows();
    e.values.resize(n);
    e.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {  // ascending -> descending
        e.values(i) = solver.eigenvalues()(n - 1 - i);
        e.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return e;
}

Matrix matrix_function_psd(const Matrix& m, const std::function<double(double)>& f,
                           bool support_only) {
    Eig e = hermitian_eig(m);
    Eigen::VectorXd fv(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        double lam = e.values(i);
        if (lam < -kPsdSlack)
            throw InvariantError("matrix_function_psd: negative eigenvalue " + std::to_string(lam));
        if (lam < kEigenZeroCutoff) lam = 0.0;
        if (lam == 0.0 && support_only) {
            fv(i) = 0.0;
            continue;
        }
        const double val = f(lam);
        if (!std::isfinite(val))
            throw SupportViolation("matrix function undefined at eigenvalue " + std::to_string(lam));
        fv(i) = val;
    }
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Matrix polar_unitary(const Matrix& k) {
    if (k.rows() != k.cols()) throw DimensionError("polar_unitary: matrix not square");
    Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

namespace {

struct LocalView {
    std::vector<std::size_t> on_off;    // offsets of the acted-on block
    std::vector<std::size_t> rest_off;  // offsets of everything else
};

LocalView local_view(const RegisterLayout& layout, std::span<const std::string> on,
                     std::size_t op_dim) {
    auto on_regs = layout.indices_of(on);
    sort_to_layout_order(on_regs);
    std::size_t d = 1;
    for (auto r : on_regs) d *= layout.at(r).dim;
    if (d != op_dim)
        throw DimensionError("operator dimension " + std::to_string(op_dim) +
                             " does not match register block dimension " + std::to_string(d));
    return {offsets_for(layout, on_regs), offsets_for(layout, complement_regs(layout, on_regs))};
}

Vector apply_on_vector(const Vector& v, const Matrix& op, const LocalView& view) {
    const std::size_t d = view.on_off.size();
    Vector out = Vector::Zero(v.size());
    Vector sub(d), res(d);
    for (std::size_t r : view.rest_off) {
        for (std::size_t i = 0; i < d; ++i) sub(i) = v(view.on_off[i] + r);
        res.noalias() = op * sub;
        for (std::size_t i = 0; i < d; ++i) out(view.on_off[i] + r) = res(i);
    }
    return out;
}

}  // namespace

LabeledState apply_local_operator(const LabeledState& s, const Matrix& op,
                                  std::span<const std::string> on) {
    const LocalView view = local_view(s.layout(), on, static_cast<std::size_t>(op.rows()));
    if (s.is_pure()) return LabeledState::pure(s.layout(), apply_on_vector(s.vec(), op, view));
    const Matrix& rho = s.dens();
    const std::size_t d = view.on_off.size();
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    // rho -> op rho op^dagger, one row/column block at a time
    Matrix tmp = Matrix::Zero(rho.rows(), rho.cols());
    Vector sub(d), res(d);
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        for (std::size_t r : view.rest_off) {
            for (std::size_t i = 0; i < d; ++i) sub(i) = rho(view.on_off[i] + r, c);
            res.noalias() = op * sub;
            for (std::size_t i = 0; i < d; ++i) tmp(view.on_off[i] + r, c) = res(i);
        }
    }
    const Matrix opd = op.adjoint();
    for (Eigen::Index rrow = 0; rrow < rho.rows(); ++rrow) {
        for (std::size_t r : view.rest_off) {
            for (std::size_t i = 0; i < d; ++i) sub(i) = tmp(rrow, view.on_off[i] + r);
            res.noalias() = opd.transpose() * sub;  // row vector times op^dagger
            for (std::size_t i = 0; i < d; ++i) out(rrow, view.on_off[i] + r) = res(i);
        }
    }
    return LabeledState::density(s.layout(), std::move(out));
}

LabeledState apply_local_unitary(const LabeledState& s, const Matrix& u,
                                 std::span<const std::string> on) {
    const double dev = (u * u.adjoint() - Matrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff();
    if (dev > 1e-9)
        throw InvariantError("apply_local_unitary: operator deviates from unitary by " +
                             std::to_string(dev));
    return apply_local_operator(s, u, on);
}

double local_expectation(const LabeledState& s, const Matrix& op,
                         std::span<const std::string> on) {
    const LocalView view = local_view(s.layout(), on, static_cast<std::size_t>(op.rows()));
    const std::size_t d = view.on_off.size();
    double total = 0.0;
    if (s.is_pure()) {
        const Vector& v = s.vec();
        Vector sub(d);
        for (std::size_t r : view.rest_off) {
            for (std::size_t i = 0; i < d; ++i) sub(i) = v(view.on_off[i] + r);
            total += (sub.adjoint() * op * sub)(0).real();
        }
    } else {
        const Matrix& rho = s.dens();
        for (std::size_t r : view.rest_off)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    total += (op(i, j) * rho(view.on_off[j] + r, view.on_off[i] + r)).real();
    }
    return total;
}

Projection project_component(const LabeledState& s, std::span<const std::string> on,
                             std::span<const std::size_t> outcome) {
    const RegisterLayout& layout = s.layout();
    const auto on_regs = layout.indices_of(on);
    if (outcome.size() != on_regs.size())
        throw DimensionError("project_component: outcome length does not match register count");
    std::size_t off = 0;
    for (std::size_t t = 0; t < on_regs.size(); ++t) {
        if (outcome[t] >= layout.at(on_regs[t]).dim)
            throw DimensionError("project_component: outcome value out of range for register '" +
                                 layout.at(on_regs[t]).label + "'");
        off += outcome[t] * layout.stride(on_regs[t]);
    }
    auto sorted_regs = on_regs;
    sort_to_layout_order(sorted_regs);
    const auto rest = offsets_for(layout, complement_regs(layout, sorted_regs));

    Projection result;
    if (s.is_pure()) {
        const Vector& v = s.vec();
        Vector post = Vector::Zero(v.size());
        for (std::size_t r : rest) {
            post(off + r) = v(off + r);
            result.prob += std::norm(v(off + r));
        }
        if (result.prob > 0) result.post = LabeledState::pure(layout, std::move(post));
    } else {
        const Matrix& rho = s.dens();
        Matrix post = Matrix::Zero(rho.rows(), rho.cols());
        for (std::size_t r : rest) {
            result.prob += rho(off + r, off + r).real();
            for (std::size_t c : rest) post(off + r, off + c) = rho(off + r, off + c);
        }
        if (result.prob > 0) result.post = LabeledState::density(layout, std::move(post));
    }
    return result;
}

LabeledState conditioned(const Projection& p) {
    if (!p.post || p.prob <= 0)
        throw ZeroProbabilityEvent("conditioning on a zero-probability outcome");
    return p.post->normalized();
}

}  // namespace repval
