#include <cmath>

#include "doctest.h"
#include "repval/qit.hpp"
#include "repval/rng.hpp"

using namespace repval;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("fidelity on known pairs") {
    Rng rng = Rng::seeded(1);
    const Matrix rho = random_density(3, 2, rng);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-8));

    CHECK(fidelity(diag2(1, 0), diag2(0.5, 0.5)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

    for (int t = 0; t < 200; ++t) {
        const Vector a = random_pure_state(4, rng), b = random_pure_state(4, rng);
        const double f = fidelity(a * a.adjoint(), b * b.adjoint());
        CHECK(f == doctest::Approx(std::abs(a.dot(b))).epsilon(1e-7));
        CHECK(fidelity(b * b.adjoint(), a * a.adjoint()) == doctest::Approx(f).epsilon(1e-8));
    }
    CHECK_THROWS_AS(fidelity(diag2(1, 0), Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("squared Bures metric") {
    Rng rng = Rng::seeded(2);
    const Matrix rho = random_density(4, 3, rng);
    CHECK(bures_sq(rho, rho) == doctest::Approx(0.0).epsilon(1e-7));

    Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2);
    e0(0) = 1;
    e1(1) = 1;
    CHECK(bures_sq(e0 * e0.adjoint(), e1 * e1.adjoint()) == doctest::Approx(1.0));
    CHECK(bures_sq(diag2(1, 0), diag2(0.5, 0.5)) ==
          doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("entropies on classical examples") {
    CHECK(relative_entropy(diag2(1, 0), diag2(1, 0)) == doctest::Approx(0.0));
    CHECK(relative_entropy(diag2(1, 0), diag2(0.5, 0.5)) == doctest::Approx(1.0));
    CHECK(entropy(diag2(0.5, 0.5)) == doctest::Approx(1.0));

    // support violation reports +inf, not an exception
    CHECK(relative_entropy(diag2(0.5, 0.5), diag2(1, 0)) == kInf);
    CHECK(relative_min_entropy(diag2(0.5, 0.5), diag2(1, 0)) == kInf);

    // mixture bound saturates at log 1/p
    CHECK(relative_min_entropy(diag2(1, 0), diag2(0.5, 0.5)) == doctest::Approx(1.0));
}

TEST_CASE("relative entropy never exceeds relative min-entropy") {
    Rng rng = Rng::seeded(3);
    for (int t = 0; t < 300; ++t) {
        const Matrix rho = random_density(3, 1 + t % 3, rng);
        const Matrix sigma = random_density(3, 3, rng);
        const double s = relative_entropy(rho, sigma);
        const double si = relative_min_entropy(rho, sigma);
        CHECK(s <= si + 1e-7);
    }
}

TEST_CASE("mutual information on canonical states") {
    Rng rng = Rng::seeded(4);
    const Matrix ra = random_density(2, 2, rng), rb = random_density(3, 2, rng);
    const LabeledState prod =
        LabeledState::density(RegisterLayout({{"A", 2}, {"B", 3}}), kron(ra, rb));
    const std::vector<std::string> la{"A"}, lb{"B"};
    CHECK(mutual_information(prod, la, lb) == doctest::Approx(0.0).epsilon(1e-9));

    Matrix corr = Matrix::Zero(4, 4);
    corr(0, 0) = corr(3, 3) = 0.5;
    const LabeledState cc = LabeledState::density(RegisterLayout({{"A", 2}, {"B", 2}}), corr);
    CHECK(mutual_information(cc, la, lb) == doctest::Approx(1.0).epsilon(1e-9));

    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const LabeledState bs = LabeledState::pure(RegisterLayout({{"A", 2}, {"B", 2}}), bell);
    CHECK(mutual_information(bs, la, lb) == doctest::Approx(2.0).epsilon(1e-9));

    CHECK_THROWS_AS(mutual_information(bs, la, la), DimensionError);
}

TEST_CASE("multipartite mutual information") {
    Rng rng = Rng::seeded(5);
    const Matrix r1 = random_density(2, 2, rng), r2 = random_density(2, 2, rng),
                 r3 = random_density(2, 2, rng);
    const LabeledState prod = LabeledState::density(
        RegisterLayout({{"X1", 2}, {"X2", 2}, {"X3", 2}}), kron(kron(r1, r2), r3));
    const std::vector<std::vector<std::string>> parts{{"X1"}, {"X2"}, {"X3"}};
    CHECK(multipartite_mutual_information(prod, parts) == doctest::Approx(0.0).epsilon(1e-9));

    // three-way shared uniform bit: total correlation is 2 bits
    Matrix ghz = Matrix::Zero(8, 8);
    ghz(0, 0) = ghz(7, 7) = 0.5;
    const LabeledState shared =
        LabeledState::density(RegisterLayout({{"X1", 2}, {"X2", 2}, {"X3", 2}}), ghz);
    CHECK(multipartite_mutual_information(shared, parts) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("multipartite total correlation matches the bipartite chain on classical states") {
    Rng rng = Rng::seeded(6);
    for (int t = 0; t < 100; ++t) {
        const auto p = random_distribution(8, rng);
        Matrix rho = Matrix::Zero(8, 8);
        for (int i = 0; i < 8; ++i) rho(i, i) = p[i];
        const LabeledState s =
            LabeledState::density(RegisterLayout({{"X1", 2}, {"X2", 2}, {"X3", 2}}), rho);
        const std::vector<std::vector<std::string>> parts{{"X1"}, {"X2"}, {"X3"}};
        const double total = multipartite_mutual_information(s, parts);
        const std::vector<std::string> x1{"X1"}, x2{"X2"}, x3{"X3"}, x12{"X1", "X2"};
        const double chain = mutual_information(s, x1, x2) + mutual_information(s, x12, x3);
        CHECK(total <= chain + 1e-7);
        CHECK(total >= -1e-9);
    }
}

namespace {

// |phi> = sum_x sqrt(mu(x)) |xx>^{XX'} |phi_x>^{AB}
LabeledState correlated_family(const std::vector<double>& mu, const std::vector<Vector>& phis,
                               std::size_t dim_a, std::size_t dim_b) {
    const std::size_t nx = mu.size();
    const RegisterLayout layout({{"X", nx}, {"X'", nx}, {"A", dim_a}, {"B", dim_b}});
    Vector v = Vector::Zero(layout.total_dim());
    const std::size_t dab = dim_a * dim_b;
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t t = 0; t < dab; ++t)
            v((x * nx + x) * dab + t) = std::sqrt(mu[x]) * phis[x](t);
    return LabeledState::pure(layout, v);
}

}  // namespace

TEST_CASE("uhlmann unitary achieves the marginal fidelity") {
    Rng rng = Rng::seeded(7);
    const std::vector<std::string> local{"X", "X'", "A"};

    {
        std::vector<Vector> phis{random_pure_state(4, rng), random_pure_state(4, rng)};
        const LabeledState phi = correlated_family({0.5, 0.5}, phis, 2, 2);
        CHECK(uhlmann_overlap(phi, phi, local) == doctest::Approx(1.0).epsilon(1e-9));
    }

    {
        Vector p0 = Vector::Zero(4), p1 = Vector::Zero(4);
        p0(0) = 1;  // B marginal |0>
        p1(1) = 1;  // B marginal |1>
        const LabeledState a = correlated_family({1.0, 0.0}, {p0, p0}, 2, 2);
        const LabeledState b = correlated_family({1.0, 0.0}, {p1, p1}, 2, 2);
        CHECK(uhlmann_overlap(a, b, local) == doctest::Approx(0.0).epsilon(1e-9));
    }

    for (int t = 0; t < 100; ++t) {
        const LabeledState a = correlated_family(
            random_distribution(2, rng), {random_pure_state(6, rng), random_pure_state(6, rng)}, 2,
            3);
        const LabeledState b = correlated_family(
            random_distribution(2, rng), {random_pure_state(6, rng), random_pure_state(6, rng)}, 2,
            3);
        const std::vector<std::string> remote{"B"};
        const double f = fidelity(partial_trace(a, remote).dens(), partial_trace(b, remote).dens());
        CHECK(uhlmann_overlap(a, b, local) == doctest::Approx(f).epsilon(1e-7));
        const Matrix u = uhlmann_unitary(a, b, local);
        CHECK((u * u.adjoint() - Matrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff() <
              1e-9);
    }
}

TEST_CASE("raz bounds on a product state") {
    Rng rng = Rng::seeded(8);
    Matrix mu1 = diag2(0.3, 0.7), mu2 = diag2(0.6, 0.4);
    const Matrix a = random_density(2, 2, rng);
    const LabeledState psi = LabeledState::density(
        RegisterLayout({{"X1", 2}, {"X2", 2}, {"A", 2}}), kron(kron(mu1, mu2), a));
    const std::vector<std::string> xs{"X1", "X2"}, as{"A"};
    const RazBounds rb = raz_check(psi, psi, xs, as);
    CHECK(rb.lhs == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rb.rhs == doctest::Approx(0.0).epsilon(1e-9));

    Matrix corr = Matrix::Zero(4, 4);
    corr(0, 0) = corr(3, 3) = 0.5;
    const LabeledState badpsi = LabeledState::density(
        RegisterLayout({{"X1", 2}, {"X2", 2}, {"A", 2}}), kron(corr, a));
    CHECK_THROWS_AS(raz_check(badpsi, badpsi, xs, as), InvariantError);
}
