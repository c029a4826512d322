#include "repval/games.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace repval {

std::size_t tuple_to_index(std::span<const std::size_t> tuple, std::span<const std::size_t> sizes) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) idx = idx * sizes[i] + tuple[i];
    return idx;
}

Tuple index_to_tuple(std::size_t index, std::span<const std::size_t> sizes) {
    Tuple t(sizes.size());
    for (std::size_t i = sizes.size(); i-- > 0;) {
        t[i] = index % sizes[i];
        index /= sizes[i];
    }
    return t;
}

std::size_t space_size(std::span<const std::size_t> sizes) {
    std::size_t n = 1;
    for (auto s : sizes) n *= s;
    return n;
}

void validate_mu(const Mu& mu, std::span<const std::size_t> input_sizes) {
    if (const auto* p = std::get_if<ProductMu>(&mu)) {
        if (p->marginals.size() != input_sizes.size())
            throw InvariantError("mu: marginal count does not match player count");
        for (std::size_t j = 0; j < input_sizes.size(); ++j) {
            const auto& m = p->marginals[j];
            if (m.size() != input_sizes[j]) throw InvariantError("mu: marginal size mismatch");
            double tot = 0;
            for (double v : m) {
                if (v < 0) throw InvariantError("mu: negative probability");
                tot += v;
            }
            if (std::abs(tot - 1.0) > 1e-12) throw InvariantError("mu: marginal does not sum to 1");
        }
    } else {
        const auto& e = std::get<ExplicitMu>(mu);
        if (e.probs.size() != space_size(input_sizes))
            throw InvariantError("mu: explicit table size mismatch");
        double tot = 0;
        for (double v : e.probs) {
            if (v < 0) throw InvariantError("mu: negative probability");
            tot += v;
        }
        if (std::abs(tot - 1.0) > 1e-12) throw InvariantError("mu: table does not sum to 1");
    }
}

Game::Game(std::vector<std::size_t> input_sizes, std::vector<std::size_t> output_sizes, Mu mu,
           PredicateFn predicate)
    : input_sizes_(std::move(input_sizes)),
      output_sizes_(std::move(output_sizes)),
      mu_(std::move(mu)),
      predicate_(std::move(predicate)) {
    if (input_sizes_.empty() || input_sizes_.size() != output_sizes_.size())
        throw InvariantError("game: player count mismatch between inputs and outputs");
    validate_mu(mu_, input_sizes_);
    if (!predicate_) throw InvariantError("game: missing predicate");
}

Game Game::from_dense(std::vector<std::size_t> input_sizes, std::vector<std::size_t> output_sizes,
                      Mu mu, std::vector<bool> bits) {
    const std::size_t nx = space_size(input_sizes);
    const std::size_t na = space_size(output_sizes);
    if (bits.size() != nx * na) throw InvariantError("dense predicate: bitmap size mismatch");
    auto shared = std::make_shared<std::vector<bool>>(std::move(bits));
    std::vector<std::size_t> in = input_sizes, out = output_sizes;
    PredicateFn fn = [shared, in, out, na](std::span<const std::size_t> x,
                                           std::span<const std::size_t> a) {
        return (*shared)[tuple_to_index(x, in) * na + tuple_to_index(a, out)];
    };
    return Game(std::move(input_sizes), std::move(output_sizes), std::move(mu), std::move(fn));
}

double Game::mu_prob(std::span<const std::size_t> x) const {
    if (const auto* p = std::get_if<ProductMu>(&mu_)) {
        double v = 1;
        for (std::size_t j = 0; j < x.size(); ++j) v *= p->marginals[j][x[j]];
        return v;
    }
    return std::get<ExplicitMu>(mu_).probs[tuple_to_index(x, input_sizes_)];
}

std::vector<bool> Game::dense_predicate() const {
    const std::size_t nx = input_space(), na = output_space();
    check_alloc(nx * na / 8 + 64, "dense predicate");
    std::vector<bool> bits(nx * na);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, input_sizes_);
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple a = index_to_tuple(ai, output_sizes_);
            bits[xi * na + ai] = predicate_(x, a);
        }
    }
    return bits;
}

CQGame::CQGame(std::vector<std::size_t> input_sizes, std::vector<std::size_t> answer_dims, Mu mu,
               VerifierFn verifier)
    : input_sizes_(std::move(input_sizes)),
      answer_dims_(std::move(answer_dims)),
      mu_(std::move(mu)),
      verifier_(std::move(verifier)) {
    if (input_sizes_.empty() || input_sizes_.size() != answer_dims_.size())
        throw InvariantError("cq game: player count mismatch");
    validate_mu(mu_, input_sizes_);
    if (!verifier_) throw InvariantError("cq game: missing verifier");
}

double CQGame::mu_prob(std::span<const std::size_t> x) const {
    if (const auto* p = std::get_if<ProductMu>(&mu_)) {
        double v = 1;
        for (std::size_t j = 0; j < x.size(); ++j) v *= p->marginals[j][x[j]];
        return v;
    }
    return std::get<ExplicitMu>(mu_).probs[tuple_to_index(x, input_sizes_)];
}

Matrix CQGame::verifier(std::span<const std::size_t> x) const {
    Matrix v = verifier_(x);
    const std::size_t d = answer_space();
    if (static_cast<std::size_t>(v.rows()) != d || static_cast<std::size_t>(v.cols()) != d)
        throw InvariantError("cq game: verifier dimension mismatch");
    Eig e = hermitian_eig(v);
    if (e.values(e.values.size() - 1) < -kPsdSlack || e.values(0) > 1.0 + kPsdSlack)
        throw InvariantError("cq game: verifier spectrum outside [0, 1]");
    return v;
}

void validate_quantum_strategy(const QuantumStrategy& s) {
    const std::size_t k = s.env_dims.size();
    if (s.povms.size() != k) throw InvariantError("strategy: povm table has wrong player count");
    std::size_t dim = 1;
    for (auto d : s.env_dims) dim *= d;
    if (static_cast<std::size_t>(s.shared_state.size()) != dim)
        throw InvariantError("strategy: shared state dimension mismatch");
    if (std::abs(s.shared_state.norm() - 1.0) > 1e-9)
        throw InvariantError("strategy: shared state not normalized");
    for (std::size_t j = 0; j < k; ++j) {
        for (const auto& povm : s.povms[j]) {
            Matrix sum = Matrix::Zero(s.env_dims[j], s.env_dims[j]);
            for (const Matrix& m : povm) {
                if (static_cast<std::size_t>(m.rows()) != s.env_dims[j] || m.rows() != m.cols())
                    throw InvariantError("strategy: POVM element dimension mismatch");
                Eig e = hermitian_eig(m);
                if (e.values(e.values.size() - 1) < -1e-9)
                    throw InvariantError("strategy: POVM element not PSD");
                sum += m;
            }
            if ((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() > 1e-9)
                throw InvariantError("strategy: POVM does not sum to identity");
        }
    }
}

void validate_cq_strategy(const CQStrategy& s) {
    const std::size_t k = s.env_dims.size();
    if (s.answer_dims.size() != k || s.unitaries.size() != k)
        throw InvariantError("cq strategy: player count mismatch");
    std::size_t dim = 1;
    for (std::size_t j = 0; j < k; ++j) dim *= s.env_dims[j] * s.answer_dims[j];
    if (static_cast<std::size_t>(s.shared_state.size()) != dim)
        throw InvariantError("cq strategy: shared state dimension mismatch");
    if (std::abs(s.shared_state.norm() - 1.0) > 1e-9)
        throw InvariantError("cq strategy: shared state not normalized");
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t d = s.env_dims[j] * s.answer_dims[j];
        for (const Matrix& u : s.unitaries[j]) {
            if (static_cast<std::size_t>(u.rows()) != d || u.rows() != u.cols())
                throw InvariantError("cq strategy: unitary dimension mismatch");
            if ((u * u.adjoint() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
                throw InvariantError("cq strategy: operator not unitary");
        }
    }
}

double NSBehavior::prob(std::size_t x_index, std::size_t a_index) const {
    return table[x_index * space_size(output_sizes) + a_index];
}

void validate_ns_behavior(const NSBehavior& b) {
    const std::size_t nx = space_size(b.input_sizes), na = space_size(b.output_sizes);
    if (b.table.size() != nx * na) throw InvariantError("behavior: table size mismatch");
    for (double v : b.table)
        if (v < -1e-12) throw InvariantError("behavior: negative probability");
    for (std::size_t xi = 0; xi < nx; ++xi) {
        double tot = 0;
        for (std::size_t ai = 0; ai < na; ++ai) tot += b.prob(xi, ai);
        if (std::abs(tot - 1.0) > 1e-9) throw InvariantError("behavior: not normalized at some x");
    }
    const std::size_t k = b.input_sizes.size();
    for (std::size_t j = 0; j < k; ++j) {
        // marginal over a_j must be independent of x_j
        std::vector<std::size_t> other_in, other_out;
        for (std::size_t t = 0; t < k; ++t)
            if (t != j) {
                other_in.push_back(b.input_sizes[t]);
                other_out.push_back(b.output_sizes[t]);
            }
        const std::size_t nxo = space_size(other_in), nao = space_size(other_out);
        for (std::size_t xo = 0; xo < nxo; ++xo) {
            const Tuple xot = index_to_tuple(xo, other_in);
            for (std::size_t ao = 0; ao < nao; ++ao) {
                const Tuple aot = index_to_tuple(ao, other_out);
                double ref = 0;
                for (std::size_t xj = 0; xj < b.input_sizes[j]; ++xj) {
                    Tuple x(k), a(k);
                    for (std::size_t t = 0, c = 0; t < k; ++t)
                        if (t != j) {
                            x[t] = xot[c];
                            a[t] = aot[c];
                            ++c;
                        }
                    x[j] = xj;
                    double m = 0;
                    for (std::size_t aj = 0; aj < b.output_sizes[j]; ++aj) {
                        a[j] = aj;
                        m += b.prob(tuple_to_index(x, b.input_sizes), tuple_to_index(a, b.output_sizes));
                    }
                    if (xj == 0)
                        ref = m;
                    else if (std::abs(m - ref) > 1e-7)
                        throw InvariantError("behavior: signaling detected for player " +
                                             std::to_string(j + 1));
                }
            }
        }
    }
}

// --- repetition ---

namespace {

std::vector<std::size_t> pow_sizes(std::span<const std::size_t> sizes, std::size_t n) {
    std::vector<std::size_t> out(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        std::size_t p = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (sizes[j] != 0 && p > std::size_t(1) << 40)
                throw BudgetError("repeat: alphabet size overflow");
            p *= sizes[j];
        }
        out[j] = p;
    }
    return out;
}

Mu repeat_mu(const Mu& mu, std::size_t n) {
    const auto& p = std::get<ProductMu>(mu);
    ProductMu out;
    for (std::size_t j = 0; j < p.marginals.size(); ++j) {
        const auto& m = p.marginals[j];
        std::size_t sz = 1;
        for (std::size_t i = 0; i < n; ++i) sz *= m.size();
        check_alloc(sz * sizeof(double), "repeated marginal");
        std::vector<double> rep(sz, 1.0);
        std::vector<std::size_t> dims(n, m.size());
        for (std::size_t c = 0; c < sz; ++c) {
            const Tuple t = index_to_tuple(c, dims);
            for (auto s : t) rep[c] *= m[s];
        }
        out.marginals.push_back(std::move(rep));
    }
    return out;
}

}  // namespace

Game repeat(const Game& g, std::size_t n) {
    if (n < 1) throw InvariantError("repeat: n must be >= 1");
    const std::size_t k = g.players();
    const auto in_sizes = pow_sizes(g.input_sizes(), n);
    const auto out_sizes = pow_sizes(g.output_sizes(), n);

    Mu mu;
    if (g.is_free()) {
        mu = repeat_mu(g.mu(), n);
    } else {
        // explicit joint over composite player symbols
        std::vector<std::size_t> base_in = g.input_sizes();
        const std::size_t nx = space_size(in_sizes);
        check_alloc(nx * sizeof(double), "repeated explicit mu");
        ExplicitMu e;
        e.probs.assign(nx, 0.0);
        std::vector<std::size_t> coord_space(n, space_size(base_in));
        const std::size_t total = space_size(coord_space);
        for (std::size_t c = 0; c < total; ++c) {
            const Tuple coords = index_to_tuple(c, coord_space);  // per-coordinate joint index
            double p = 1;
            Tuple comp(k, 0);  // composite symbol per player
            std::vector<Tuple> xs(n);
            for (std::size_t i = 0; i < n; ++i) {
                xs[i] = index_to_tuple(coords[i], base_in);
                p *= g.mu_prob(xs[i]);
            }
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < n; ++i) comp[j] = comp[j] * base_in[j] + xs[i][j];
            e.probs[tuple_to_index(comp, in_sizes)] += p;
        }
        mu = std::move(e);
    }

    const Game base = g;
    std::vector<std::size_t> base_in = g.input_sizes(), base_out = g.output_sizes();
    Game::PredicateFn fn = [base, base_in, base_out, n, k](std::span<const std::size_t> x,
                                                           std::span<const std::size_t> a) {
        Tuple xi(k), ai(k);
        std::vector<Tuple> xdig(k), adig(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> xs(n, base_in[j]), as(n, base_out[j]);
            xdig[j] = index_to_tuple(x[j], xs);
            adig[j] = index_to_tuple(a[j], as);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                xi[j] = xdig[j][i];
                ai[j] = adig[j][i];
            }
            if (!base.predicate(xi, ai)) return false;
        }
        return true;
    };
    return Game(in_sizes, out_sizes, std::move(mu), std::move(fn));
}

CQGame repeat_cq(const CQGame& g, std::size_t n) {
    if (n < 1) throw InvariantError("repeat_cq: n must be >= 1");
    const std::size_t k = g.players();
    const auto in_sizes = pow_sizes(g.input_sizes(), n);
    const auto ans_dims = pow_sizes(g.answer_dims(), n);
    if (!g.is_free()) throw InvariantError("repeat_cq: explicit joint inputs not supported");
    Mu mu = repeat_mu(g.mu(), n);

    const CQGame base = g;
    std::vector<std::size_t> base_in = g.input_sizes();
    CQGame::VerifierFn fn = [base, base_in, n, k](std::span<const std::size_t> x) {
        // W_x = ox_i V_{x_i}, then permuted from coordinate-major (A_1..A_k per
        // coordinate) to the repeated game's player-major answer order
        // (A_(1,j)..A_(n,j) per player).
        std::vector<Tuple> xdig(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> xs(n, base_in[j]);
            xdig[j] = index_to_tuple(x[j], xs);
        }
        Matrix w = Matrix::Ones(1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            Tuple xi(k);
            for (std::size_t j = 0; j < k; ++j) xi[j] = xdig[j][i];
            w = kron(w, base.verifier(xi));
        }
        // dims coordinate-major: (i, j) -> position i*k + j; want (j, i) player-major
        std::vector<std::size_t> dims(n * k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) dims[i * k + j] = base.answer_dims()[j];
        std::vector<std::size_t> perm(n * k);  // new position -> old position
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) perm[j * n + i] = i * k + j;
        // permute tensor factors of w
        const std::size_t D = static_cast<std::size_t>(w.rows());
        std::vector<std::size_t> new_dims(n * k);
        for (std::size_t t = 0; t < n * k; ++t) new_dims[t] = dims[perm[t]];
        std::vector<std::size_t> map(D);
        for (std::size_t idx = 0; idx < D; ++idx) {
            const Tuple digits = index_to_tuple(idx, new_dims);
            Tuple old(n * k);
            for (std::size_t t = 0; t < n * k; ++t) old[perm[t]] = digits[t];
            map[idx] = tuple_to_index(old, dims);
        }
        Matrix out(D, D);
        for (std::size_t r = 0; r < D; ++r)
            for (std::size_t c = 0; c < D; ++c) out(r, c) = w(map[r], map[c]);
        return out;
    };
    return CQGame(in_sizes, ans_dims, std::move(mu), std::move(fn));
}

namespace {

// POVM composed by measuring per-coordinate POVMs in sequence on one register:
// M_(a_1..a_n) = K^dagger K with K = sqrt(M_{a_n}) ... sqrt(M_{a_1}).
std::vector<Matrix> sequential_compose(const std::vector<std::vector<Matrix>>& per_coord,
                                       std::span<const std::size_t> counts) {
    std::vector<Matrix> out;
    const std::size_t total = space_size(counts);
    std::vector<Matrix> sqrts_flat;
    for (std::size_t i = 0; i < per_coord.size(); ++i)
        for (const auto& m : per_coord[i])
            sqrts_flat.push_back(matrix_function_psd(m, [](double x) { return std::sqrt(x); }, true));
    const std::size_t d = per_coord[0][0].rows();
    for (std::size_t idx = 0; idx < total; ++idx) {
        const Tuple a = index_to_tuple(idx, counts);
        Matrix kraus = Matrix::Identity(d, d);
        std::size_t off = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            kraus = sqrts_flat[off + a[i]] * kraus;
            off += counts[i];
        }
        out.push_back(kraus.adjoint() * kraus);
    }
    return out;
}

}  // namespace

QuantumStrategy repeat_strategy(const QuantumStrategy& s, std::size_t n) {
    const std::size_t k = s.env_dims.size();
    QuantumStrategy out;
    out.env_dims.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t d = 1;
        for (std::size_t i = 0; i < n; ++i) d *= s.env_dims[j];
        out.env_dims[j] = d;
    }
    // shared state: n copies of xi with registers regrouped player-major
    std::vector<std::size_t> dims(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) dims[i * k + j] = s.env_dims[j];
    Vector xi_n = s.shared_state;
    for (std::size_t i = 1; i < n; ++i) xi_n = kron(xi_n, s.shared_state);
    std::vector<std::size_t> perm(n * k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) perm[j * n + i] = i * k + j;
    std::vector<std::size_t> new_dims(n * k);
    for (std::size_t t = 0; t < n * k; ++t) new_dims[t] = dims[perm[t]];
    Vector reordered(xi_n.size());
    for (std::size_t idx = 0; idx < static_cast<std::size_t>(xi_n.size()); ++idx) {
        const Tuple digits = index_to_tuple(idx, new_dims);
        Tuple old(n * k);
        for (std::size_t t = 0; t < n * k; ++t) old[perm[t]] = digits[t];
        reordered(idx) = xi_n(tuple_to_index(old, dims));
    }
    out.shared_state = std::move(reordered);

    out.povms.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t nx = s.povms[j].size();
        std::vector<std::size_t> xs(n, nx), as(n, s.povms[j][0].size());
        const std::size_t nxn = space_size(xs), nan = space_size(as);
        out.povms[j].resize(nxn);
        for (std::size_t xc = 0; xc < nxn; ++xc) {
            const Tuple xd = index_to_tuple(xc, xs);
            out.povms[j][xc].resize(nan);
            for (std::size_t ac = 0; ac < nan; ++ac) {
                const Tuple ad = index_to_tuple(ac, as);
                Matrix m = Matrix::Ones(1, 1);
                for (std::size_t i = 0; i < n; ++i) m = kron(m, s.povms[j][xd[i]][ad[i]]);
                out.povms[j][xc][ac] = std::move(m);
            }
        }
    }
    return out;
}

QuantumStrategy sequential_repeat_strategy(const QuantumStrategy& s, std::size_t n) {
    const std::size_t k = s.env_dims.size();
    QuantumStrategy out;
    out.env_dims = s.env_dims;
    out.shared_state = s.shared_state;
    out.povms.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t nx = s.povms[j].size();
        const std::size_t na = s.povms[j][0].size();
        std::vector<std::size_t> xs(n, nx), as(n, na);
        const std::size_t nxn = space_size(xs);
        out.povms[j].resize(nxn);
        for (std::size_t xc = 0; xc < nxn; ++xc) {
            const Tuple xd = index_to_tuple(xc, xs);
            std::vector<std::vector<Matrix>> per_coord(n);
            for (std::size_t i = 0; i < n; ++i) per_coord[i] = s.povms[j][xd[i]];
            out.povms[j][xc] = sequential_compose(per_coord, as);
        }
    }
    return out;
}

CQStrategy repeat_cq_strategy(const CQStrategy& s, std::size_t n) {
    const std::size_t k = s.env_dims.size();
    CQStrategy out;
    out.env_dims.resize(k);
    out.answer_dims.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t de = 1, da = 1;
        for (std::size_t i = 0; i < n; ++i) {
            de *= s.env_dims[j];
            da *= s.answer_dims[j];
        }
        out.env_dims[j] = de;
        out.answer_dims[j] = da;
    }
    // regroup n copies of the shared state from coordinate-major blocks
    // (E_1 A_1 .. E_k A_k per coordinate) to player-major
    // (E_j = E_j^1..E_j^n, A_j = A_(1,j)..A_(n,j)).
    std::vector<std::size_t> dims(n * 2 * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            dims[i * 2 * k + 2 * j] = s.env_dims[j];
            dims[i * 2 * k + 2 * j + 1] = s.answer_dims[j];
        }
    Vector xi_n = s.shared_state;
    for (std::size_t i = 1; i < n; ++i) xi_n = kron(xi_n, s.shared_state);
    std::vector<std::size_t> perm;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) perm.push_back(i * 2 * k + 2 * j);      // E_j^i
        for (std::size_t i = 0; i < n; ++i) perm.push_back(i * 2 * k + 2 * j + 1);  // A_(i,j)
    }
    std::vector<std::size_t> new_dims(perm.size());
    for (std::size_t t = 0; t < perm.size(); ++t) new_dims[t] = dims[perm[t]];
    Vector reordered(xi_n.size());
    for (std::size_t idx = 0; idx < static_cast<std::size_t>(xi_n.size()); ++idx) {
        const Tuple digits = index_to_tuple(idx, new_dims);
        Tuple old(perm.size());
        for (std::size_t t = 0; t < perm.size(); ++t) old[perm[t]] = digits[t];
        reordered(idx) = xi_n(tuple_to_index(old, dims));
    }
    out.shared_state = std::move(reordered);

    out.unitaries.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t nx = s.unitaries[j].size();
        std::vector<std::size_t> xs(n, nx);
        const std::size_t nxn = space_size(xs);
        out.unitaries[j].resize(nxn);
        for (std::size_t xc = 0; xc < nxn; ++xc) {
            const Tuple xd = index_to_tuple(xc, xs);
            // ox_i U_{x_i} on (E^1..E^n, A^1..A^n): build on coordinate-major
            // pairs then permute to (all E, all A).
            Matrix u = Matrix::Ones(1, 1);
            for (std::size_t i = 0; i < n; ++i) u = kron(u, s.unitaries[j][xd[i]]);
            std::vector<std::size_t> pd(2 * n);
            for (std::size_t i = 0; i < n; ++i) {
                pd[2 * i] = s.env_dims[j];
                pd[2 * i + 1] = s.answer_dims[j];
            }
            std::vector<std::size_t> pperm;
            for (std::size_t i = 0; i < n; ++i) pperm.push_back(2 * i);
            for (std::size_t i = 0; i < n; ++i) pperm.push_back(2 * i + 1);
            std::vector<std::size_t> nd(2 * n);
            for (std::size_t t = 0; t < 2 * n; ++t) nd[t] = pd[pperm[t]];
            const std::size_t D = static_cast<std::size_t>(u.rows());
            std::vector<std::size_t> map(D);
            for (std::size_t idx = 0; idx < D; ++idx) {
                const Tuple digits = index_to_tuple(idx, nd);
                Tuple old(2 * n);
                for (std::size_t t = 0; t < 2 * n; ++t) old[pperm[t]] = digits[t];
                map[idx] = tuple_to_index(old, pd);
            }
            Matrix per(D, D);
            for (std::size_t r = 0; r < D; ++r)
                for (std::size_t c = 0; c < D; ++c) per(r, c) = u(map[r], map[c]);
            out.unitaries[j][xc] = std::move(per);
        }
    }
    return out;
}

// --- uniformization ---

namespace {

// Largest-remainder rounding of mu to multiples of 1/M; returns slot counts.
std::vector<std::size_t> apportion(const std::vector<double>& mu, std::size_t M) {
    std::vector<std::size_t> counts(mu.size());
    std::vector<std::pair<double, std::size_t>> rem(mu.size());
    std::size_t used = 0;
    for (std::size_t s = 0; s < mu.size(); ++s) {
        const double exact = mu[s] * static_cast<double>(M);
        counts[s] = static_cast<std::size_t>(std::floor(exact + 1e-12));
        rem[s] = {exact - std::floor(exact + 1e-12), s};
        used += counts[s];
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t t = 0; used < M && t < rem.size(); ++t, ++used) ++counts[rem[t].second];
    return counts;
}

double tv_distance(const std::vector<double>& mu, const std::vector<std::size_t>& counts,
                   std::size_t M) {
    double tv = 0;
    for (std::size_t s = 0; s < mu.size(); ++s)
        tv += std::abs(mu[s] - static_cast<double>(counts[s]) / static_cast<double>(M));
    return tv / 2;
}

}  // namespace

Uniformized uniformize(const Game& g, double gamma) {
    if (!g.is_free()) throw InvariantError("uniformize: game must be free");
    if (gamma <= 0) throw InvariantError("uniformize: gamma must be positive");
    const auto& marginals = std::get<ProductMu>(g.mu()).marginals;
    const double per_player = gamma / static_cast<double>(g.players());

    Uniformized out;
    std::vector<std::size_t> new_sizes;
    for (std::size_t j = 0; j < g.players(); ++j) {
        const auto& mu = marginals[j];
        std::size_t M = 1;
        std::vector<std::size_t> counts;
        for (;; ++M) {
            if (M > 1000000) throw BudgetError("uniformize: alphabet blow-up beyond 1e6");
            counts = apportion(mu, M);
            if (tv_distance(mu, counts, M) <= per_player + 1e-15) break;
        }
        std::vector<std::size_t> f;
        f.reserve(M);
        for (std::size_t s = 0; s < counts.size(); ++s)
            for (std::size_t c = 0; c < counts[s]; ++c) f.push_back(s);
        out.tv_distances.push_back(tv_distance(mu, counts, M));
        out.encodings.push_back(std::move(f));
        new_sizes.push_back(M);
    }

    ProductMu uniform;
    for (auto M : new_sizes) uniform.marginals.push_back(std::vector<double>(M, 1.0 / M));
    const Game base = g;
    auto encodings = out.encodings;
    Game::PredicateFn fn = [base, encodings](std::span<const std::size_t> x,
                                             std::span<const std::size_t> a) {
        Tuple mapped(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) mapped[j] = encodings[j][x[j]];
        return base.predicate(mapped, a);
    };
    out.game = Game(new_sizes, g.output_sizes(), std::move(uniform), std::move(fn));
    return out;
}

ClassicalStrategy pull_back(const Uniformized& u, const ClassicalStrategy& s) {
    ClassicalStrategy out;
    for (std::size_t j = 0; j < u.encodings.size(); ++j) {
        std::vector<std::size_t> table(u.encodings[j].size());
        for (std::size_t v = 0; v < table.size(); ++v) table[v] = s.tables[j][u.encodings[j][v]];
        out.tables.push_back(std::move(table));
    }
    return out;
}

// --- agreement game ---

Game build_agreement_game(std::size_t k) {
    if (k < 2) throw InvariantError("agreement game needs k >= 2");
    std::vector<std::size_t> in(k, 2), out(k, 2 * k);
    ProductMu mu;
    for (std::size_t j = 0; j < k; ++j) mu.marginals.push_back({0.5, 0.5});
    Game::PredicateFn fn = [k](std::span<const std::size_t> x, std::span<const std::size_t> a) {
        const std::size_t pointer = a[0] / 2;
        for (std::size_t j = 1; j < k; ++j)
            if (a[j] / 2 != pointer) return false;
        std::size_t parity = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (j != pointer) parity ^= (a[j] & 1);
        return x[pointer] == parity;
    };
    return Game(std::move(in), std::move(out), std::move(mu), std::move(fn));
}

ClassicalStrategy agreement_repeated_strategy(std::size_t k) {
    if (k < 2) throw InvariantError("agreement strategy needs k >= 2");
    ClassicalStrategy s;
    std::vector<std::size_t> coord_in(k, 2), coord_out(k, 2 * k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t domain = space_size(coord_in);   // inputs over k coordinates
        std::vector<std::size_t> table(domain);
        for (std::size_t xc = 0; xc < domain; ++xc) {
            const Tuple bits = index_to_tuple(xc, coord_in);  // player j's input per coordinate
            Tuple answer(k);
            for (std::size_t l = 0; l < k; ++l) answer[l] = l * 2 + bits[j];
            table[xc] = tuple_to_index(answer, coord_out);
        }
        s.tables.push_back(std::move(table));
    }
    return s;
}

}  // namespace repval
