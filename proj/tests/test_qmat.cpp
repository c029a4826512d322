#include <cmath>

#include "doctest.h"
#include "repval/qmat.hpp"
#include "repval/rng.hpp"

using namespace repval;

namespace {

LabeledState bell_pair() {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return LabeledState::pure(RegisterLayout({{"A", 2}, {"B", 2}}), v);
}

}  // namespace

TEST_CASE("tensor product of identities and basis states") {
    const Matrix id2 = Matrix::Identity(2, 2), id3 = Matrix::Identity(3, 3);
    CHECK((kron(id2, id3) - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

    Vector zero = Vector::Zero(2), one = Vector::Zero(2);
    zero(0) = 1;
    one(1) = 1;
    const LabeledState a = LabeledState::pure(RegisterLayout({{"X", 2}}), zero);
    const LabeledState b = LabeledState::pure(RegisterLayout({{"A", 2}}), one);
    const LabeledState ab = tensor_product(a, b);
    CHECK(ab.layout().total_dim() == 4);
    CHECK(ab.vec()(1) == cxd(1, 0));  // |01>
    CHECK(ab.layout().at(0).label == "X");
    CHECK(ab.layout().at(1).label == "A");

    CHECK_THROWS_AS(tensor_product(a, a), DimensionError);
}

TEST_CASE("partial trace basics") {
    const LabeledState bell = bell_pair();
    const std::vector<std::string> keep{"A"};
    const Matrix red = partial_trace(bell, keep).dens();
    CHECK((red - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);

    // keeping every register gives back the input density
    const std::vector<std::string> all{"A", "B"};
    const Matrix full = partial_trace(bell, all).dens();
    CHECK((full - bell.density_matrix()).cwiseAbs().maxCoeff() < 1e-12);

    const std::vector<std::string> unknown{"Q"};
    CHECK_THROWS_AS(partial_trace(bell, unknown), DimensionError);
}

TEST_CASE("partial trace of a cq state keeps the classical part") {
    Rng rng = Rng::seeded(11);
    const Matrix r0 = random_density(2, 2, rng), r1 = random_density(2, 1, rng);
    Matrix rho = Matrix::Zero(4, 4);
    rho.block(0, 0, 2, 2) = 0.5 * r0;
    rho.block(2, 2, 2, 2) = 0.5 * r1;
    const LabeledState s = LabeledState::density(RegisterLayout({{"X", 2}, {"A", 2}}), rho);
    const std::vector<std::string> keep{"X"};
    const Matrix red = partial_trace(s, keep).dens();
    CHECK(std::abs(red(0, 0).real() - 0.5) < 1e-12);
    CHECK(std::abs(red(1, 1).real() - 0.5) < 1e-12);
    CHECK(std::abs(red(0, 1)) < 1e-12);
}

TEST_CASE("partial trace preserves trace and positivity on random states") {
    Rng rng = Rng::seeded(2024);
    for (int t = 0; t < 1000; ++t) {
        const Matrix rho = random_density(6, 1 + t % 6, rng);
        const LabeledState s = LabeledState::density(RegisterLayout({{"X", 2}, {"Y", 3}}), rho);
        const std::vector<std::string> keep{(t % 2) ? "X" : "Y"};
        const Matrix red = partial_trace(s, keep).dens();
        CHECK(std::abs(red.trace().real() - 1.0) < 1e-9);
        Eig e = hermitian_eig(red);
        CHECK(e.values(e.values.size() - 1) > -1e-9);
    }
}

TEST_CASE("hermitian_eig on Pauli Z and identity") {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    Eig e = hermitian_eig(z);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(-1.0));

    Eig ei = hermitian_eig(Matrix::Identity(5, 5));
    for (int i = 0; i < 5; ++i) CHECK(ei.values(i) == doctest::Approx(1.0));

    Matrix bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(hermitian_eig(bad), InvariantError);
}

TEST_CASE("hermitian_eig reconstruction on random inputs") {
    Rng rng = Rng::seeded(7);
    for (int t = 0; t < 200; ++t) {
        const Matrix h = random_hermitian(8, rng);
        Eig e = hermitian_eig(h);
        const Matrix rec = e.vectors * e.values.cast<cxd>().asDiagonal() * e.vectors.adjoint();
        const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
        CHECK((rec - h).cwiseAbs().maxCoeff() / scale < 1e-8);
        CHECK((e.vectors * e.vectors.adjoint() - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("matrix functions on the spectrum") {
    Matrix d(2, 2);
    d << 4, 0, 0, 9;
    const Matrix sq = matrix_function_psd(d, [](double x) { return std::sqrt(x); }, false);
    CHECK(sq(0, 0).real() == doctest::Approx(2.0));
    CHECK(sq(1, 1).real() == doctest::Approx(3.0));

    const Matrix lg = matrix_function_psd(Matrix::Identity(3, 3),
                                          [](double x) { return std::log2(x); }, true);
    CHECK(lg.cwiseAbs().maxCoeff() < 1e-12);

    Matrix sing(2, 2);
    sing << 4, 0, 0, 0;
    const Matrix pinv =
        matrix_function_psd(sing, [](double x) { return 1.0 / std::sqrt(x); }, true);
    CHECK(pinv(0, 0).real() == doctest::Approx(0.5));
    CHECK(std::abs(pinv(1, 1)) < 1e-12);

    CHECK_THROWS_AS(matrix_function_psd(sing, [](double x) { return std::log2(x); }, false),
                    SupportViolation);
}

TEST_CASE("polar unitary maximizes the trace inner product") {
    CHECK((polar_unitary(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);

    Matrix d(2, 2);
    d << 2.0, 0, 0, 0.5;
    CHECK((polar_unitary(d) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    const Matrix im = cxd(0, 1) * Matrix::Identity(2, 2);
    const Matrix u = polar_unitary(im);
    CHECK(std::abs((u * im).trace() - cxd(2, 0)) < 1e-9);
    CHECK((u - cxd(0, -1) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);

    Rng rng = Rng::seeded(5);
    for (int t = 0; t < 100; ++t) {
        Matrix k(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) k(r, c) = rng.cnormal();
        const Matrix best = polar_unitary(k);
        const double achieved = (best * k).trace().real();
        Eigen::JacobiSVD<Matrix> svd(k);
        CHECK(achieved == doctest::Approx(svd.singularValues().sum()).epsilon(1e-8));
        for (int w = 0; w < 100; ++w) {
            const Matrix rival = random_unitary(3, rng);
            CHECK(achieved >= std::abs((rival * k).trace()) - 1e-9);
        }
    }
}

TEST_CASE("apply_local_unitary acts only on the named registers") {
    const LabeledState bell = bell_pair();
    const std::vector<std::string> on{"A"};
    const LabeledState same = apply_local_unitary(bell, Matrix::Identity(2, 2), on);
    CHECK((same.vec() - bell.vec()).cwiseAbs().maxCoeff() < 1e-12);

    // bit flip on X of |0>_X |0>_A
    Vector v = Vector::Zero(4);
    v(0) = 1;
    const LabeledState s = LabeledState::pure(RegisterLayout({{"X", 2}, {"A", 2}}), v);
    Matrix flip(2, 2);
    flip << 0, 1, 1, 0;
    const std::vector<std::string> onx{"X"};
    const LabeledState flipped = apply_local_unitary(s, flip, onx);
    CHECK(flipped.vec()(2) == cxd(1, 0));  // |10>

    Rng rng = Rng::seeded(3);
    for (int t = 0; t < 50; ++t) {
        const LabeledState rnd = LabeledState::pure(RegisterLayout({{"X", 2}, {"A", 3}, {"B", 2}}),
                                                    random_pure_state(12, rng));
        const Matrix u = random_unitary(4, rng);
        const std::vector<std::string> onxb{"X", "B"};
        const LabeledState moved = apply_local_unitary(rnd, u, onxb);
        CHECK(std::abs(moved.vec().norm() - 1.0) < 1e-10);
        const std::vector<std::string> keep{"A"};
        const Matrix before = partial_trace(rnd, keep).dens();
        const Matrix after = partial_trace(moved, keep).dens();
        CHECK((before - after).cwiseAbs().maxCoeff() < 1e-10);
    }

    CHECK_THROWS_AS(apply_local_unitary(bell, Matrix::Identity(3, 3), on), DimensionError);
}

TEST_CASE("apply_local_operator matches on density representations") {
    Rng rng = Rng::seeded(23);
    for (int t = 0; t < 30; ++t) {
        const RegisterLayout layout({{"X", 2}, {"Y", 2}, {"Z", 3}});
        const Vector v = random_pure_state(12, rng);
        const LabeledState pure = LabeledState::pure(layout, v);
        const LabeledState dens = LabeledState::density(layout, v * v.adjoint());
        const Matrix u = random_unitary(6, rng);
        const std::vector<std::string> on{"X", "Z"};
        const Matrix a = apply_local_operator(pure, u, on).density_matrix();
        const Matrix b = apply_local_operator(dens, u, on).dens();
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("project_component probabilities") {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const LabeledState s = LabeledState::pure(RegisterLayout({{"X", 2}}), plus);
    const std::vector<std::string> on{"X"};
    const std::vector<std::size_t> zero{0};
    const Projection p = project_component(s, on, zero);
    CHECK(p.prob == doctest::Approx(0.5));

    // projecting a basis state onto its own string keeps it intact
    Vector basis = Vector::Zero(4);
    basis(2) = 1;
    const LabeledState b = LabeledState::pure(RegisterLayout({{"X", 2}, {"A", 2}}), basis);
    const std::vector<std::string> onboth{"X", "A"};
    const std::vector<std::size_t> outcome{1, 0};
    const Projection pb = project_component(b, onboth, outcome);
    CHECK(pb.prob == doctest::Approx(1.0));
    CHECK((pb.post->vec() - basis).cwiseAbs().maxCoeff() < 1e-12);

    const std::vector<std::size_t> miss{0, 0};
    const Projection pm = project_component(b, onboth, miss);
    CHECK(pm.prob == 0.0);
    CHECK(!pm.post.has_value());
    CHECK_THROWS_AS(conditioned(pm), ZeroProbabilityEvent);
}

TEST_CASE("projection outcomes over a basis resolve the state trace") {
    Rng rng = Rng::seeded(17);
    for (int t = 0; t < 1000; ++t) {
        const bool pure = t % 2 == 0;
        const RegisterLayout layout({{"X", 2}, {"Y", 3}});
        const LabeledState s = pure
                                   ? LabeledState::pure(layout, random_pure_state(6, rng))
                                   : LabeledState::density(layout, random_density(6, 1 + t % 3, rng));
        const std::vector<std::string> on{"Y"};
        double total = 0;
        for (std::size_t o = 0; o < 3; ++o) {
            const std::vector<std::size_t> outcome{o};
            total += project_component(s, on, outcome).prob;
        }
        CHECK(total == doctest::Approx(s.trace()).epsilon(1e-9));
    }
}

TEST_CASE("budget gate rejects oversized allocations") {
    CHECK_THROWS_AS(check_alloc(std::size_t(1) << 60, "test"), BudgetError);
}
