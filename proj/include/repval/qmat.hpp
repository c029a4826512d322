#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "repval/errors.hpp"

namespace repval {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using cxd = std::complex<double>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdSlack = 1e-10;
inline constexpr double kEigenZeroCutoff = 1e-12;

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

struct Register {
    std::string label;
    std::size_t dim;
};

// Ordered list of named registers; the first register is the most significant
// digit of the composite index (row-major, matching kron order).
class RegisterLayout {
  public:
    RegisterLayout() = default;
    explicit RegisterLayout(std::vector<Register> regs);

    std::size_t total_dim() const { return total_; }
    std::size_t size() const { return regs_.size(); }
    const Register& at(std::size_t i) const { return regs_[i]; }
    const std::vector<Register>& registers() const { return regs_; }

    bool has(std::string_view label) const;
    std::size_t index_of(std::string_view label) const;  // throws DimensionError
    std::vector<std::size_t> indices_of(std::span<const std::string> labels) const;

    // Stride of register i in the composite index.
    std::size_t stride(std::size_t i) const { return strides_[i]; }
    std::size_t digit(std::size_t composite, std::size_t i) const {
        return (composite / strides_[i]) % regs_[i].dim;
    }

    RegisterLayout subset(std::span<const std::size_t> reg_indices) const;

  private:
    std::vector<Register> regs_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
};

RegisterLayout tensor(const RegisterLayout& a, const RegisterLayout& b);

// Pure vector or (possibly subnormalized) density operator over a layout.
class LabeledState {
  public:
    static LabeledState pure(RegisterLayout layout, Vector v);
    static LabeledState density(RegisterLayout layout, Matrix rho);

    bool is_pure() const { return pure_.has_value(); }
    const RegisterLayout& layout() const { return layout_; }
    const Vector& vec() const;
    const Matrix& dens() const;
    Matrix density_matrix() const;  // forms |v><v| when pure
    double trace() const;           // squared norm when pure

    LabeledState normalized() const;

  private:
    RegisterLayout layout_;
    std::optional<Vector> pure_;
    std::optional<Matrix> dens_;
};

LabeledState tensor_product(const LabeledState& a, const LabeledState& b);

LabeledState partial_trace(const LabeledState& s, std::span<const std::string> keep);

struct Eig {
    Eigen::VectorXd values;  // descending
    Matrix vectors;          // unitary columns, matching order
};
Eig hermitian_eig(const Matrix& m);

// f applied on the spectrum of a PSD matrix. Eigenvalues below the zero
// cutoff are exact zeros; with support_only they map to zero (pseudo-function),
// otherwise f(0) is used. A non-finite f value raises SupportViolation.
Matrix matrix_function_psd(const Matrix& m, const std::function<double(double)>& f,
                           bool support_only);

// The unitary maximizing Re tr(U*k); tr(U*k) equals the nuclear norm of k.
Matrix polar_unitary(const Matrix& k);

// u acts on the registers named in `on`, ordered as they appear in the layout.
LabeledState apply_local_unitary(const LabeledState& s, const Matrix& u,
                                 std::span<const std::string> on);
// Same contraction without the unitarity check (for POVM/Kraus pieces).
LabeledState apply_local_operator(const LabeledState& s, const Matrix& op,
                                  std::span<const std::string> on);
// <s| (op on `on`) |s> for pure s, or tr(op rho) for density s.
double local_expectation(const LabeledState& s, const Matrix& op,
                         std::span<const std::string> on);

struct Projection {
    double prob = 0.0;
    // Subnormalized post-state; empty when the outcome has probability zero
    // (the state is then undefined).
    std::optional<LabeledState> post;
};
Projection project_component(const LabeledState& s, std::span<const std::string> on,
                             std::span<const std::size_t> outcome);

// Normalizes the projected component; throws ZeroProbabilityEvent.
LabeledState conditioned(const Projection& p);

}  // namespace repval
