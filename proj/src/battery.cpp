#include "repval/battery.hpp"

#include <cmath>
#include <functional>

#include <json.hpp>

#include "repval/games.hpp"
#include "repval/qit.hpp"
#include "repval/rng.hpp"

namespace repval {

namespace {

constexpr double kTol = 1e-7;

struct Check {
    std::string name;
    // returns lhs - rhs (or |lhs-rhs| for equalities); positive means violated
    std::function<double(Rng&)> margin;
};

double rel_margin(double lhs, double rhs) {
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (std::isinf(rhs)) return -1.0;  // anything is below +inf
    if (std::isinf(lhs)) return 1.0;
    return (lhs - rhs) / scale;
}

Matrix random_channel_apply(const Matrix& rho, const Matrix& isometry, std::size_t out_dim,
                            std::size_t env_dim) {
    const Matrix big = isometry * rho * isometry.adjoint();
    Matrix out = Matrix::Zero(out_dim, out_dim);
    for (std::size_t e = 0; e < env_dim; ++e)
        for (std::size_t i = 0; i < out_dim; ++i)
            for (std::size_t j = 0; j < out_dim; ++j) out(i, j) += big(i * env_dim + e, j * env_dim + e);
    return out;
}

LabeledState random_cq_state(std::size_t nx, std::size_t da, Rng& rng, std::vector<double>* mu_out,
                             std::vector<Matrix>* blocks_out) {
    const auto mu = random_distribution(nx, rng);
    Matrix rho = Matrix::Zero(nx * da, nx * da);
    std::vector<Matrix> blocks;
    for (std::size_t x = 0; x < nx; ++x) {
        const Matrix b = random_density(da, 1 + rng.integer(da), rng);
        rho.block(x * da, x * da, da, da) = mu[x] * b;
        blocks.push_back(b);
    }
    if (mu_out) *mu_out = mu;
    if (blocks_out) *blocks_out = blocks;
    return LabeledState::density(RegisterLayout({{"X", nx}, {"A", da}}), rho);
}

std::vector<Check> qit_checks() {
    std::vector<Check> checks;

    checks.push_back({"bures_triangle_chain", [](Rng& rng) {
        const std::size_t n = 2 + rng.integer(3);  // chain length 2..4
        const std::size_t d = 2 + rng.integer(3);
        std::vector<Matrix> rho;
        for (std::size_t i = 0; i <= n; ++i) rho.push_back(random_density(d, 1 + rng.integer(d), rng));
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += bures_sq(rho[i], rho[i + 1]);
        return rel_margin(bures_sq(rho[0], rho[n]), static_cast<double>(n) * sum);
    }});

    checks.push_back({"bures_contractive_under_channels", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(3);
        const std::size_t e = 2 + rng.integer(3);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, 1 + rng.integer(d), rng);
        const Matrix v = random_isometry(d, e, rng);
        const Matrix er = random_channel_apply(rho, v, d, e);
        const Matrix es = random_channel_apply(sigma, v, d, e);
        return rel_margin(bures_sq(er, es), bures_sq(rho, sigma));
    }});

    checks.push_back({"bures_unitary_invariance", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(3);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, 1 + rng.integer(d), rng);
        const Matrix u = random_unitary(d, rng);
        const double a = bures_sq(Matrix(u * rho * u.adjoint()), Matrix(u * sigma * u.adjoint()));
        const double b = bures_sq(rho, sigma);
        return std::abs(a - b) - kTol * 0.5;  // equality within tolerance
    }});

    checks.push_back({"bures_convexity", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(2);
        const std::size_t parts = 2 + rng.integer(2);
        const auto p = random_distribution(parts, rng);
        Matrix ma = Matrix::Zero(d, d), mb = Matrix::Zero(d, d);
        double sum = 0;
        for (std::size_t i = 0; i < parts; ++i) {
            const Matrix a = random_density(d, 1 + rng.integer(d), rng);
            const Matrix b = random_density(d, 1 + rng.integer(d), rng);
            ma += p[i] * a;
            mb += p[i] * b;
            sum += p[i] * bures_sq(a, b);
        }
        return rel_margin(bures_sq(ma, mb), sum);
    }});

    checks.push_back({"bures_cq_block_equality", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(2);
        const std::size_t parts = 2 + rng.integer(2);
        const auto p = random_distribution(parts, rng);
        Matrix ma = Matrix::Zero(parts * d, parts * d), mb = Matrix::Zero(parts * d, parts * d);
        double sum = 0;
        for (std::size_t i = 0; i < parts; ++i) {
            const Matrix a = random_density(d, 1 + rng.integer(d), rng);
            const Matrix b = random_density(d, 1 + rng.integer(d), rng);
            ma.block(i * d, i * d, d, d) = p[i] * a;
            mb.block(i * d, i * d, d, d) = p[i] * b;
            sum += p[i] * bures_sq(a, b);
        }
        return std::abs(bures_sq(ma, mb) - sum) - kTol * 0.5;
    }});

    checks.push_back({"rel_entropy_dominates_bures", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(3);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, d, rng);
        return rel_margin(bures_sq(rho, sigma), relative_entropy(rho, sigma));
    }});

    checks.push_back({"cq_mutual_info_is_avg_divergence", [](Rng& rng) {
        const std::size_t nx = 2 + rng.integer(2), da = 2 + rng.integer(2);
        std::vector<double> mu;
        std::vector<Matrix> blocks;
        const LabeledState s = random_cq_state(nx, da, rng, &mu, &blocks);
        const std::vector<std::string> lx{"X"}, la{"A"};
        const double mi = mutual_information(s, lx, la);
        Matrix avg = Matrix::Zero(da, da);
        for (std::size_t x = 0; x < nx; ++x) avg += mu[x] * blocks[x];
        double expd = 0;
        for (std::size_t x = 0; x < nx; ++x) expd += mu[x] * relative_entropy(blocks[x], avg);
        return std::abs(mi - expd) - kTol * 0.5;
    }});

    checks.push_back({"rel_entropy_monotone_partial_trace", [](Rng& rng) {
        const RegisterLayout layout({{"X", 2}, {"Y", 2}});
        const Matrix rho = random_density(4, 1 + rng.integer(4), rng);
        const Matrix sigma = random_density(4, 4, rng);
        const LabeledState sr = LabeledState::density(layout, rho);
        const LabeledState ss = LabeledState::density(layout, sigma);
        const std::vector<std::string> keep{"X"};
        const double full = relative_entropy(rho, sigma);
        const double part = relative_entropy(partial_trace(sr, keep).dens(),
                                             partial_trace(ss, keep).dens());
        return rel_margin(part, full);
    }});

    checks.push_back({"rel_entropy_superadditive_on_products", [](Rng& rng) {
        const RegisterLayout layout({{"X", 2}, {"Y", 2}});
        const Matrix rho = random_density(4, 1 + rng.integer(4), rng);
        const Matrix sx = random_density(2, 2, rng), sy = random_density(2, 2, rng);
        const LabeledState sr = LabeledState::density(layout, rho);
        const std::vector<std::string> kx{"X"}, ky{"Y"};
        const double lhs = relative_entropy(partial_trace(sr, kx).dens(), sx) +
                           relative_entropy(partial_trace(sr, ky).dens(), sy);
        const double rhs = relative_entropy(rho, kron(sx, sy));
        return rel_margin(lhs, rhs);
    }});

    checks.push_back({"rel_entropy_cq_chain_rule", [](Rng& rng) {
        const std::size_t nx = 2 + rng.integer(2), da = 2;
        const auto mu = random_distribution(nx, rng);
        const auto mu1 = random_distribution(nx, rng);
        Matrix rho = Matrix::Zero(nx * da, nx * da), rho1 = rho;
        std::vector<Matrix> bx, b1;
        for (std::size_t x = 0; x < nx; ++x) {
            bx.push_back(random_density(da, da, rng));
            b1.push_back(random_density(da, da, rng));
            rho.block(x * da, x * da, da, da) = mu[x] * bx[x];
            rho1.block(x * da, x * da, da, da) = mu1[x] * b1[x];
        }
        double cls = 0;
        for (std::size_t x = 0; x < nx; ++x)
            if (mu1[x] > 0) cls += mu1[x] * std::log2(mu1[x] / mu[x]);
        double cond = 0;
        for (std::size_t x = 0; x < nx; ++x) cond += mu1[x] * relative_entropy(b1[x], bx[x]);
        return std::abs(relative_entropy(rho1, rho) - (cls + cond)) - kTol * 0.5;
    }});

    checks.push_back({"min_entropy_of_mixture_component", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(3);
        const double p = 0.05 + 0.9 * rng.uniform();
        const Matrix r0 = random_density(d, 1 + rng.integer(d), rng);
        const Matrix r1 = random_density(d, 1 + rng.integer(d), rng);
        const Matrix mix = p * r0 + (1 - p) * r1;
        return rel_margin(relative_min_entropy(r0, mix), std::log2(1.0 / p));
    }});

    checks.push_back({"min_entropy_monotone_partial_trace", [](Rng& rng) {
        const RegisterLayout layout({{"X", 2}, {"Y", 2}});
        const Matrix rho = random_density(4, 1 + rng.integer(4), rng);
        const Matrix sigma = random_density(4, 4, rng);
        const LabeledState sr = LabeledState::density(layout, rho);
        const LabeledState ss = LabeledState::density(layout, sigma);
        const std::vector<std::string> keep{"X"};
        return rel_margin(relative_min_entropy(partial_trace(sr, keep).dens(),
                                               partial_trace(ss, keep).dens()),
                          relative_min_entropy(rho, sigma));
    }});

    checks.push_back({"min_entropy_chain", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(2);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, d, rng);
        const Matrix tau = random_density(d, d, rng);
        return rel_margin(relative_min_entropy(rho, tau),
                          relative_min_entropy(rho, sigma) + relative_min_entropy(sigma, tau));
    }});

    checks.push_back({"rel_then_min_entropy_chain", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(2);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, d, rng);
        const Matrix tau = random_density(d, d, rng);
        return rel_margin(relative_entropy(rho, tau),
                          relative_entropy(rho, sigma) + relative_min_entropy(sigma, tau));
    }});

    checks.push_back({"rel_entropy_at_most_min_entropy", [](Rng& rng) {
        const std::size_t d = 2 + rng.integer(3);
        const Matrix rho = random_density(d, 1 + rng.integer(d), rng);
        const Matrix sigma = random_density(d, d, rng);
        return rel_margin(relative_entropy(rho, sigma), relative_min_entropy(rho, sigma));
    }});

    checks.push_back({"binary_divergence_tail_bound", [](Rng& rng) {
        const double p = rng.uniform(), q = rng.uniform();
        const double delta = std::max(binary_relative_entropy(p, q), p * (1 + 1e-12)) + 1e-12;
        return rel_margin(q, 4 * delta);
    }});

    checks.push_back({"binary_bures_tail_bound", [](Rng& rng) {
        const double p = rng.uniform(), q = rng.uniform();
        const double delta = std::max(binary_bures_sq(p, q), p * (1 + 1e-12)) + 1e-12;
        return rel_margin(q, 4 * delta);
    }});

    // constant actually delivered by the sqrt(q) <= 2 sqrt(delta) + sqrt(p) chain
    checks.push_back({"binary_bures_tail_bound_9x", [](Rng& rng) {
        const double p = rng.uniform(), q = rng.uniform();
        const double delta = std::max(binary_bures_sq(p, q), p * (1 + 1e-12)) + 1e-12;
        return rel_margin(q, 9 * delta);
    }});

    checks.push_back({"pure_family_mixture_bound", [](Rng& rng) {
        const std::size_t count = 2 + rng.integer(3), d = 2 + rng.integer(3);
        std::vector<Vector> fam;
        for (std::size_t i = 0; i < count; ++i) fam.push_back(random_pure_state(d, rng));
        const auto mu = random_distribution(count, rng);
        const auto tau = random_distribution(count, rng);
        Matrix em = Matrix::Zero(d, d), et = Matrix::Zero(d, d);
        double cls = 0;
        for (std::size_t i = 0; i < count; ++i) {
            em += mu[i] * (fam[i] * fam[i].adjoint());
            et += tau[i] * (fam[i] * fam[i].adjoint());
            if (mu[i] > 0) cls += mu[i] * std::log2(mu[i] / tau[i]);
        }
        return rel_margin(bures_sq(em, et), cls);
    }});

    checks.push_back({"product_state_conditioning", [](Rng& rng) {
        // psi = (ox_i diag mu_i) ox psi^A; condition on a spectral event
        const std::size_t n = 2 + rng.integer(2);
        const std::size_t da = 2;
        std::vector<std::vector<double>> mus;
        std::vector<Register> regs;
        Matrix xpart = Matrix::Ones(1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            auto mu = random_distribution(2, rng);
            for (auto& v : mu) v = 0.05 + 0.9 * v;  // keep full support
            double tot = mu[0] + mu[1];
            mu[0] /= tot;
            mu[1] /= tot;
            Matrix d2 = Matrix::Zero(2, 2);
            d2(0, 0) = mu[0];
            d2(1, 1) = mu[1];
            xpart = kron(xpart, d2);
            mus.push_back(mu);
            regs.push_back({"X" + std::to_string(i + 1), 2});
        }
        regs.push_back({"A", da});
        const Matrix a = random_density(da, da, rng);
        const Matrix psi_m = kron(xpart, a);
        const LabeledState psi = LabeledState::density(RegisterLayout(regs), psi_m);

        // event operators commute with psi: diagonal on X, spectral on A
        Eig ea = hermitian_eig(a);
        const std::size_t nx = std::size_t(1) << n;
        Matrix p = Matrix::Zero(nx * da, nx * da);
        for (std::size_t x = 0; x < nx; ++x) {
            Eigen::VectorXd coeff(da);
            for (std::size_t t = 0; t < da; ++t) coeff(t) = 0.1 + 0.9 * rng.uniform();
            Matrix pa = Matrix::Zero(da, da);
            for (std::size_t t = 0; t < da; ++t)
                pa += coeff(t) * ea.vectors.col(t) * ea.vectors.col(t).adjoint();
            p.block(x * da, x * da, da, da) = pa;
        }
        // p is block diagonal and commutes with psi block-by-block, so the
        // conditioned state is (P psi) / tr(P psi)
        const Matrix numer = p * psi_m;
        const double prob = numer.trace().real();
        const Matrix phi_m = (numer + numer.adjoint()) / (2.0 * prob);
        const LabeledState phi = LabeledState::density(psi.layout(), phi_m);
        std::vector<std::string> xs;
        for (std::size_t i = 0; i < n; ++i) xs.push_back("X" + std::to_string(i + 1));
        const std::vector<std::string> as{"A"};
        const RazBounds rb = raz_check(phi, psi, xs, as);
        const double m1 = rel_margin(rb.lhs, rb.rhs);
        const double m2 = rel_margin(rb.rhs, 2.0 * std::log2(1.0 / prob));
        return std::max(m1, m2);
    }});

    return checks;
}

}  // namespace

std::vector<BatteryLine> run_qit_battery(std::size_t cases, std::uint64_t seed) {
    const auto checks = qit_checks();
    std::vector<BatteryLine> lines;
    Rng root = Rng::seeded(seed);
    for (std::size_t c = 0; c < checks.size(); ++c) {
        BatteryLine line;
        line.name = checks[c].name;
        line.cases = cases;
        line.worst_margin = -kInf;
        Rng rng = root.child(c);
        for (std::size_t t = 0; t < cases; ++t) {
            const double margin = checks[c].margin(rng);
            if (margin > line.worst_margin) line.worst_margin = margin;
            if (margin > kTol) ++line.violations;
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<BatteryLine> run_rounding_battery(std::size_t cases, std::uint64_t seed,
                                              std::size_t players) {
    const std::size_t k = players;
    BatteryLine single{"rounding_single_block_k" + std::to_string(k), cases, 0, -kInf};
    BatteryLine perplayer{"rounding_per_player_k" + std::to_string(k), cases, 0, -kInf};

    Rng root = Rng::seeded(seed);
    for (std::size_t t = 0; t < cases; ++t) {
        Rng rng = root.child(t);
        // layout: X(j), X'(j), A(j) per player, plus a remote register B
        std::vector<Register> regs;
        const std::size_t nxj = 2, daj = 2, db = 2;
        for (std::size_t j = 1; j <= k; ++j) regs.push_back({"X" + std::to_string(j), nxj});
        for (std::size_t j = 1; j <= k; ++j) regs.push_back({"X'" + std::to_string(j), nxj});
        for (std::size_t j = 1; j <= k; ++j) regs.push_back({"A" + std::to_string(j), daj});
        regs.push_back({"B", db});
        const RegisterLayout layout{regs};

        std::vector<std::size_t> xsizes(k, nxj);
        const std::size_t nx = space_size(xsizes);
        const auto mu = random_distribution(nx, rng);
        const std::size_t dab = space_size(std::vector<std::size_t>(k, daj)) * db;
        Vector v = Vector::Zero(layout.total_dim());
        for (std::size_t x = 0; x < nx; ++x) {
            const Vector part = random_pure_state(dab, rng);
            for (std::size_t tt = 0; tt < dab; ++tt)
                v((x * nx + x) * dab + tt) = std::sqrt(mu[x]) * part(tt);
        }
        const LabeledState phi = LabeledState::pure(layout, v);

        // conditioned states phi_x
        std::vector<std::string> xxp;
        for (std::size_t j = 1; j <= k; ++j) xxp.push_back("X" + std::to_string(j));
        for (std::size_t j = 1; j <= k; ++j) xxp.push_back("X'" + std::to_string(j));
        std::vector<LabeledState> phi_x;
        std::vector<double> sigma(nx);
        for (std::size_t x = 0; x < nx; ++x) {
            const Tuple xt = index_to_tuple(x, xsizes);
            Tuple uu = xt;
            uu.insert(uu.end(), xt.begin(), xt.end());
            const Projection p = project_component(phi, xxp, uu);
            sigma[x] = p.prob;
            phi_x.push_back(p.post ? p.post->normalized() : phi);
        }

        // single-block rounding: U_x on all X X' A registers
        {
            std::vector<std::string> local = xxp;
            for (std::size_t j = 1; j <= k; ++j) local.push_back("A" + std::to_string(j));
            double ek = 0;
            for (std::size_t x = 0; x < nx; ++x) {
                if (sigma[x] <= 1e-14) continue;
                const Matrix u = uhlmann_unitary(phi_x[x], phi, local);
                const LabeledState moved = apply_local_unitary(phi, u, local);
                ek += sigma[x] * (1.0 - std::min(1.0, std::abs(phi_x[x].vec().dot(moved.vec()))));
            }
            const std::vector<std::string> lb{"B"};
            const std::vector<std::string> lx(xxp.begin(), xxp.begin() + k);
            const double bound = mutual_information(phi, lx, lb);
            const double margin = (ek - bound) / std::max(1.0, bound);
            if (margin > single.worst_margin) single.worst_margin = margin;
            if (margin > kTol) ++single.violations;
        }

        // per-player rounding: U^j_{x_j} on X_j X'_j A_j
        {
            std::vector<std::vector<Matrix>> units(k);
            for (std::size_t j = 1; j <= k; ++j) {
                units[j - 1].resize(nxj);
                for (std::size_t uj = 0; uj < nxj; ++uj) {
                    const std::vector<std::string> on{"X" + std::to_string(j),
                                                      "X'" + std::to_string(j)};
                    const std::vector<std::size_t> outcome{uj, uj};
                    const Projection p = project_component(phi, on, outcome);
                    if (!p.post || p.prob <= 1e-14) {
                        units[j - 1][uj] = Matrix();
                        continue;
                    }
                    const std::vector<std::string> local{"X" + std::to_string(j),
                                                         "X'" + std::to_string(j),
                                                         "A" + std::to_string(j)};
                    units[j - 1][uj] = uhlmann_unitary(p.post->normalized(), phi, local);
                }
            }
            double ek = 0;
            for (std::size_t x = 0; x < nx; ++x) {
                if (sigma[x] <= 1e-14) continue;
                const Tuple xt = index_to_tuple(x, xsizes);
                LabeledState moved = phi;
                for (std::size_t j = 1; j <= k; ++j) {
                    const Matrix& u = units[j - 1][xt[j - 1]];
                    if (u.size() == 0) continue;
                    const std::vector<std::string> local{"X" + std::to_string(j),
                                                         "X'" + std::to_string(j),
                                                         "A" + std::to_string(j)};
                    moved = apply_local_unitary(moved, u, local);
                }
                ek += sigma[x] * (1.0 - std::min(1.0, std::abs(phi_x[x].vec().dot(moved.vec()))));
            }
            double misum = 0;
            for (std::size_t j = 1; j <= k; ++j) {
                const std::vector<std::string> lx{"X" + std::to_string(j)};
                std::vector<std::string> rest;
                for (std::size_t jj = 1; jj <= k; ++jj) {
                    if (jj == j) continue;
                    rest.push_back("X" + std::to_string(jj));
                    rest.push_back("X'" + std::to_string(jj));
                    rest.push_back("A" + std::to_string(jj));
                }
                rest.push_back("B");
                misum += mutual_information(phi, lx, rest);
            }
            const double bound = 4.0 * static_cast<double>(k) * misum;
            const double margin = (ek - bound) / std::max(1.0, bound);
            if (margin > perplayer.worst_margin) perplayer.worst_margin = margin;
            if (margin > 1e-6) ++perplayer.violations;
        }
    }
    return {single, perplayer};
}

std::string battery_to_json(const std::vector<BatteryLine>& lines, std::uint64_t seed) {
    nlohmann::json out;
    out["seed"] = seed;
    nlohmann::json rows = nlohmann::json::array();
    std::size_t total_violations = 0;
    for (const auto& l : lines) {
        rows.push_back({{"name", l.name},
                        {"cases", l.cases},
                        {"violations", l.violations},
                        {"worst_margin", l.worst_margin}});
        total_violations += l.violations;
    }
    out["checks"] = std::move(rows);
    out["total_violations"] = total_violations;
    return out.dump(2);
}

}  // namespace repval
