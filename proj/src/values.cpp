#include "repval/values.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "repval/qit.hpp"
#include "repval/rng.hpp"
#include "repval/simplex.hpp"

namespace repval {

using nlohmann::json;

std::string value_result_to_json(const ValueResult& r) {
    json out;
    out["method"] = r.method;
    out["value"] = r.value;
    json diag;
    diag["iterations"] = r.diagnostics.iterations;
    diag["restarts"] = r.diagnostics.restarts;
    diag["seed"] = r.diagnostics.seed;
    if (!r.diagnostics.lp_status.empty()) diag["lp_status"] = r.diagnostics.lp_status;
    out["diagnostics"] = std::move(diag);
    if (r.witness) {
        if (const auto* c = std::get_if<ClassicalStrategy>(&*r.witness))
            out["witness"] = json::parse(strategy_to_json(*c));
        else if (const auto* q = std::get_if<QuantumStrategy>(&*r.witness))
            out["witness"] = json::parse(strategy_to_json(*q));
        else if (const auto* b = std::get_if<NSBehavior>(&*r.witness)) {
            out["witness"] = {{"type", "ns_behavior"},
                              {"inputs", b->input_sizes},
                              {"outputs", b->output_sizes},
                              {"table", b->table}};
        }
    }
    return out.dump(2);
}

double evaluate_classical(const Game& g, const ClassicalStrategy& s) {
    const std::size_t k = g.players();
    if (s.tables.size() != k) throw InvariantError("strategy shape does not match game");
    for (std::size_t j = 0; j < k; ++j)
        if (s.tables[j].size() != g.input_sizes()[j])
            throw InvariantError("strategy table size mismatch for player " + std::to_string(j + 1));
    const std::size_t nx = g.input_space();
    double total = 0;
    Tuple a(k);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, g.input_sizes());
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        for (std::size_t j = 0; j < k; ++j) {
            a[j] = s.tables[j][x[j]];
            if (a[j] >= g.output_sizes()[j]) throw InvariantError("strategy answer out of range");
        }
        if (g.predicate(x, a)) total += p;
    }
    return total;
}

ValueResult classical_value_bruteforce(const Game& g, std::size_t budget) {
    const std::size_t k = g.players();
    double count = 1;
    for (std::size_t j = 0; j < k; ++j)
        count *= std::pow(static_cast<double>(g.output_sizes()[j]),
                          static_cast<double>(g.input_sizes()[j]));
    if (count > static_cast<double>(budget))
        throw BudgetError("classical brute force: " + std::to_string(count) +
                          " strategies exceed budget " + std::to_string(budget));

    ClassicalStrategy s;
    for (std::size_t j = 0; j < k; ++j) s.tables.push_back(std::vector<std::size_t>(g.input_sizes()[j], 0));

    ValueResult best;
    best.method = "classical_bruteforce";
    best.value = -1;
    std::size_t iterations = 0;
    for (;;) {
        ++iterations;
        const double v = evaluate_classical(g, s);
        if (v > best.value + 1e-15) {
            best.value = v;
            best.witness = s;
        }
        // odometer over all tables, player-major then input-major
        std::size_t j = 0, xi = 0;
        for (;;) {
            if (j == k) break;
            if (++s.tables[j][xi] < g.output_sizes()[j]) break;
            s.tables[j][xi] = 0;
            if (++xi == g.input_sizes()[j]) {
                xi = 0;
                ++j;
            }
        }
        if (j == k) break;
    }
    best.diagnostics.iterations = iterations;
    return best;
}

double evaluate_ns(const Game& g, const NSBehavior& b) {
    const std::size_t nx = g.input_space(), na = g.output_space();
    double total = 0;
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, g.input_sizes());
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple a = index_to_tuple(ai, g.output_sizes());
            if (g.predicate(x, a)) total += p * b.prob(xi, ai);
        }
    }
    return total;
}

ValueResult ns_value_lp(const Game& g, std::size_t budget) {
    const std::size_t k = g.players();
    const std::size_t nx = g.input_space(), na = g.output_space();
    const std::size_t nvars = nx * na;
    if (nvars > budget) throw BudgetError("ns LP: variable count exceeds budget");

    // rows: per-x normalization, then per-player NS equalities
    std::size_t rows = nx;
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t other = 1;
        for (std::size_t t = 0; t < k; ++t)
            if (t != j) other *= g.input_sizes()[t] * g.output_sizes()[t];
        rows += other * (g.input_sizes()[j] - 1);
    }
    check_alloc(rows * nvars * sizeof(double), "ns LP");

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, nvars);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nvars);

    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, g.input_sizes());
        const double p = g.mu_prob(x);
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple aa = index_to_tuple(ai, g.output_sizes());
            if (g.predicate(x, aa)) c(xi * na + ai) = p;
        }
        a.row(xi).segment(xi * na, na).setOnes();
        b(xi) = 1.0;
    }

    std::size_t row = nx;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<std::size_t> other_in, other_out;
        for (std::size_t t = 0; t < k; ++t)
            if (t != j) {
                other_in.push_back(g.input_sizes()[t]);
                other_out.push_back(g.output_sizes()[t]);
            }
        const std::size_t nxo = space_size(other_in), nao = space_size(other_out);
        for (std::size_t xo = 0; xo < nxo; ++xo) {
            const Tuple xot = index_to_tuple(xo, other_in);
            for (std::size_t ao = 0; ao < nao; ++ao) {
                const Tuple aot = index_to_tuple(ao, other_out);
                for (std::size_t xj = 1; xj < g.input_sizes()[j]; ++xj) {
                    Tuple x(k), aa(k);
                    for (std::size_t t = 0, ci = 0; t < k; ++t)
                        if (t != j) {
                            x[t] = xot[ci];
                            aa[t] = aot[ci];
                            ++ci;
                        }
                    for (std::size_t aj = 0; aj < g.output_sizes()[j]; ++aj) {
                        aa[j] = aj;
                        x[j] = 0;
                        a(row, tuple_to_index(x, g.input_sizes()) * na +
                                   tuple_to_index(aa, g.output_sizes())) += 1.0;
                        x[j] = xj;
                        a(row, tuple_to_index(x, g.input_sizes()) * na +
                                   tuple_to_index(aa, g.output_sizes())) -= 1.0;
                    }
                    ++row;
                }
            }
        }
    }

    const LpResult lp = simplex_solve(a, b, c);
    ValueResult out;
    out.method = "ns_lp";
    out.diagnostics.iterations = lp.iterations;
    switch (lp.status) {
        case LpResult::Status::Optimal:
            out.diagnostics.lp_status = "optimal";
            break;
        case LpResult::Status::Infeasible:
            throw Error("ns LP reported infeasible; the uniform behavior is always feasible");
        case LpResult::Status::Unbounded:
            throw Error("ns LP reported unbounded; probabilities are bounded");
        case LpResult::Status::IterationLimit:
            out.diagnostics.lp_status = "iteration_limit";
            break;
    }
    out.value = lp.objective;
    NSBehavior w;
    w.input_sizes = g.input_sizes();
    w.output_sizes = g.output_sizes();
    w.table = lp.solution;
    validate_ns_behavior(w);
    out.witness = std::move(w);
    return out;
}

namespace {

Matrix povm_tensor(const QuantumStrategy& s, std::span<const std::size_t> x,
                   std::span<const std::size_t> a) {
    Matrix m = Matrix::Ones(1, 1);
    for (std::size_t j = 0; j < s.env_dims.size(); ++j) m = kron(m, s.povms[j][x[j]][a[j]]);
    return m;
}

}  // namespace

double evaluate_quantum_strategy(const Game& g, const QuantumStrategy& s) {
    validate_quantum_strategy(s);
    if (s.env_dims.size() != g.players()) throw DimensionError("strategy player count mismatch");
    for (std::size_t j = 0; j < g.players(); ++j) {
        if (s.povms[j].size() != g.input_sizes()[j] ||
            s.povms[j][0].size() != g.output_sizes()[j])
            throw DimensionError("strategy alphabet mismatch for player " + std::to_string(j + 1));
    }
    const std::size_t nx = g.input_space(), na = g.output_space();
    const Vector& xi = s.shared_state;
    double total = 0;
    for (std::size_t xidx = 0; xidx < nx; ++xidx) {
        const Tuple x = index_to_tuple(xidx, g.input_sizes());
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        Matrix win = Matrix::Zero(xi.size(), xi.size());
        bool any = false;
        for (std::size_t aidx = 0; aidx < na; ++aidx) {
            const Tuple a = index_to_tuple(aidx, g.output_sizes());
            if (!g.predicate(x, a)) continue;
            win += povm_tensor(s, x, a);
            any = true;
        }
        if (any) total += p * (xi.adjoint() * win * xi)(0).real();
    }
    return std::min(1.0, std::max(0.0, total));
}

namespace {

RegisterLayout cq_layout(const CQStrategy& s) {
    std::vector<Register> regs;
    for (std::size_t j = 0; j < s.env_dims.size(); ++j) {
        regs.push_back({"E" + std::to_string(j + 1), s.env_dims[j]});
        regs.push_back({"A" + std::to_string(j + 1), s.answer_dims[j]});
    }
    return RegisterLayout(regs);
}

std::vector<std::string> cq_answer_labels(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < k; ++j) out.push_back("A" + std::to_string(j + 1));
    return out;
}

LabeledState cq_played_state(const CQStrategy& s, std::span<const std::size_t> x) {
    LabeledState st = LabeledState::pure(cq_layout(s), s.shared_state);
    for (std::size_t j = 0; j < s.env_dims.size(); ++j) {
        const std::vector<std::string> on{"E" + std::to_string(j + 1), "A" + std::to_string(j + 1)};
        st = apply_local_unitary(st, s.unitaries[j][x[j]], on);
    }
    return st;
}

}  // namespace

double evaluate_cq_strategy(const CQGame& g, const CQStrategy& s) {
    validate_cq_strategy(s);
    if (s.env_dims.size() != g.players()) throw DimensionError("cq strategy player count mismatch");
    if (s.answer_dims != g.answer_dims()) throw DimensionError("cq strategy answer dims mismatch");
    const std::size_t nx = space_size(g.input_sizes());
    const auto alabels = cq_answer_labels(g.players());
    double total = 0;
    for (std::size_t xidx = 0; xidx < nx; ++xidx) {
        const Tuple x = index_to_tuple(xidx, g.input_sizes());
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        const LabeledState played = cq_played_state(s, x);
        total += p * local_expectation(played, g.verifier(x), alabels);
    }
    return std::min(1.0, std::max(0.0, total));
}

double cq_win_subset_probability(const CQGame& g, std::size_t n, const CQStrategy& s,
                                 std::span<const std::size_t> c) {
    // s is a strategy for the n-fold repetition of g.
    const CQGame gn = repeat_cq(g, n);
    validate_cq_strategy(s);
    if (s.answer_dims != gn.answer_dims()) throw DimensionError("strategy is not for the n-fold game");
    const std::size_t nx = space_size(gn.input_sizes());
    const std::size_t k = g.players();
    const auto alabels = cq_answer_labels(k);
    double total = 0;
    for (std::size_t xidx = 0; xidx < nx; ++xidx) {
        const Tuple x = index_to_tuple(xidx, gn.input_sizes());
        const double p = gn.mu_prob(x);
        if (p == 0) continue;
        const LabeledState played = cq_played_state(s, x);
        // verifier for the subset: tensor of per-coordinate V over i in C,
        // identity elsewhere, in the repeated game's player-major answer order.
        std::vector<Tuple> xdig(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> xs(n, g.input_sizes()[j]);
            xdig[j] = index_to_tuple(x[j], xs);
        }
        // build on (i, j)-ordered registers then permute player-major
        std::vector<std::size_t> dims(n * k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) dims[i * k + j] = g.answer_dims()[j];
        Matrix w = Matrix::Ones(1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::find(c.begin(), c.end(), i) != c.end()) {
                Tuple xi(k);
                for (std::size_t j = 0; j < k; ++j) xi[j] = xdig[j][i];
                w = kron(w, g.verifier(xi));
            } else {
                std::size_t d = 1;
                for (std::size_t j = 0; j < k; ++j) d *= g.answer_dims()[j];
                w = kron(w, Matrix::Identity(d, d));
            }
        }
        std::vector<std::size_t> perm(n * k);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) perm[j * n + i] = i * k + j;
        std::vector<std::size_t> new_dims(n * k);
        for (std::size_t t = 0; t < n * k; ++t) new_dims[t] = dims[perm[t]];
        const std::size_t D = static_cast<std::size_t>(w.rows());
        std::vector<std::size_t> map(D);
        for (std::size_t idx = 0; idx < D; ++idx) {
            const Tuple digits = index_to_tuple(idx, new_dims);
            Tuple old(n * k);
            for (std::size_t t = 0; t < n * k; ++t) old[perm[t]] = digits[t];
            map[idx] = tuple_to_index(old, dims);
        }
        Matrix wp(D, D);
        for (std::size_t r = 0; r < D; ++r)
            for (std::size_t cc = 0; cc < D; ++cc) wp(r, cc) = w(map[r], map[cc]);
        total += p * local_expectation(played, wp, alabels);
    }
    return std::min(1.0, std::max(0.0, total));
}

namespace {

struct SeesawState {
    Vector xi;
    std::vector<std::vector<std::array<Matrix, 2>>> meas;  // [j][x_j][outcome]
};

Matrix seesaw_game_operator(const Game& g, const SeesawState& st,
                            std::span<const std::size_t> env_dims) {
    std::size_t dim = 1;
    for (auto d : env_dims) dim *= d;
    Matrix op = Matrix::Zero(dim, dim);
    const std::size_t nx = g.input_space(), na = g.output_space();
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, g.input_sizes());
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple a = index_to_tuple(ai, g.output_sizes());
            if (!g.predicate(x, a)) continue;
            Matrix m = Matrix::Ones(1, 1);
            for (std::size_t j = 0; j < g.players(); ++j) m = kron(m, st.meas[j][x[j]][a[j]]);
            op += p * m;
        }
    }
    return op;
}

// Response operator pair (R_0, R_1) for player j at input x_j: the objective
// is tr(M_0 R_0) + tr(M_1 R_1) when all other players are fixed.
std::array<Matrix, 2> response_operators(const Game& g, const SeesawState& st,
                                         std::span<const std::size_t> env_dims, std::size_t j,
                                         std::size_t xj) {
    const std::size_t k = g.players();
    const std::size_t dj = env_dims[j];
    std::array<Matrix, 2> r{Matrix::Zero(dj, dj), Matrix::Zero(dj, dj)};
    std::size_t dim = 1;
    for (auto d : env_dims) dim *= d;
    const Matrix rho = st.xi * st.xi.adjoint();

    std::size_t left = 1, right = 1;
    for (std::size_t t = 0; t < j; ++t) left *= env_dims[t];
    for (std::size_t t = j + 1; t < k; ++t) right *= env_dims[t];

    const std::size_t nx = g.input_space(), na = g.output_space();
    for (std::size_t xidx = 0; xidx < nx; ++xidx) {
        const Tuple x = index_to_tuple(xidx, g.input_sizes());
        if (x[j] != xj) continue;
        const double p = g.mu_prob(x);
        if (p == 0) continue;
        for (std::size_t aidx = 0; aidx < na; ++aidx) {
            const Tuple a = index_to_tuple(aidx, g.output_sizes());
            if (!g.predicate(x, a)) continue;
            Matrix others = Matrix::Ones(1, 1);
            for (std::size_t t = 0; t < k; ++t)
                others = kron(others, t == j ? Matrix::Identity(dj, dj) : st.meas[t][x[t]][a[t]]);
            const Matrix prod = others * rho;
            // partial trace onto player j's slot
            Matrix contracted = Matrix::Zero(dj, dj);
            for (std::size_t l = 0; l < left; ++l)
                for (std::size_t rr = 0; rr < right; ++rr)
                    for (std::size_t m1 = 0; m1 < dj; ++m1)
                        for (std::size_t m2 = 0; m2 < dj; ++m2)
                            contracted(m1, m2) +=
                                prod((l * dj + m1) * right + rr, (l * dj + m2) * right + rr);
            // tr over the full space of others*rho with M on slot j equals
            // tr(M * contracted^T); keep the transpose here.
            r[a[j]] += p * contracted.transpose();
        }
    }
    return r;
}

Matrix positive_eigenspace_projector(const Matrix& h) {
    Eig e = hermitian_eig((h + h.adjoint()) / 2.0);
    Matrix p = Matrix::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        if (e.values(i) > 0) p += e.vectors.col(i) * e.vectors.col(i).adjoint();
    return p;
}

}  // namespace

ValueResult seesaw_lower_bound(const Game& g, std::span<const std::size_t> env_dims,
                               std::size_t restarts, std::uint64_t seed, std::size_t max_sweeps) {
    const std::size_t k = g.players();
    if (env_dims.size() != k) throw DimensionError("seesaw: env dims per player required");
    for (auto sz : g.output_sizes())
        if (sz != 2)
            throw InvariantError("seesaw supports binary outputs only");

    ValueResult best;
    best.method = "seesaw";
    best.value = -1;
    best.diagnostics.seed = seed;
    best.diagnostics.restarts = restarts;
    Rng root = Rng::seeded(seed);

    for (std::size_t rs = 0; rs < restarts; ++rs) {
        Rng rng = root.child(rs);
        SeesawState st;
        st.meas.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            st.meas[j].resize(g.input_sizes()[j]);
            for (std::size_t x = 0; x < g.input_sizes()[j]; ++x) {
                const Matrix p = positive_eigenspace_projector(random_hermitian(env_dims[j], rng));
                st.meas[j][x] = {p, Matrix::Identity(env_dims[j], env_dims[j]) - p};
            }
        }
        std::size_t dim = 1;
        for (auto d : env_dims) dim *= d;
        st.xi = random_pure_state(dim, rng);

        double prev = -1;
        std::size_t sweeps = 0;
        for (; sweeps < max_sweeps; ++sweeps) {
            const Matrix op = seesaw_game_operator(g, st, env_dims);
            Eig e = hermitian_eig((op + op.adjoint()) / 2.0);
            st.xi = e.vectors.col(0);
            const double val = e.values(0);
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t x = 0; x < g.input_sizes()[j]; ++x) {
                    const auto r = response_operators(g, st, env_dims, j, x);
                    const Matrix p = positive_eigenspace_projector(r[0] - r[1]);
                    st.meas[j][x] = {p, Matrix::Identity(env_dims[j], env_dims[j]) - p};
                }
            }
            if (val < prev - 1e-10)
                throw Error("seesaw objective decreased; best-response step is broken");
            if (val - prev < 1e-12) {
                prev = val;
                break;
            }
            prev = val;
        }

        if (prev > best.value) {
            best.value = std::min(1.0, prev);
            QuantumStrategy w;
            w.env_dims.assign(env_dims.begin(), env_dims.end());
            w.shared_state = st.xi;
            w.povms.resize(k);
            for (std::size_t j = 0; j < k; ++j) {
                w.povms[j].resize(g.input_sizes()[j]);
                for (std::size_t x = 0; x < g.input_sizes()[j]; ++x)
                    w.povms[j][x] = {st.meas[j][x][0], st.meas[j][x][1]};
            }
            best.witness = std::move(w);
            best.diagnostics.iterations = sweeps;
        }
    }
    return best;
}

QuantumStrategy embed_classical(const Game& g, const ClassicalStrategy& s) {
    QuantumStrategy out;
    const std::size_t k = g.players();
    out.env_dims.assign(k, 1);
    out.shared_state = Vector::Ones(1);
    out.povms.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.povms[j].resize(g.input_sizes()[j]);
        for (std::size_t x = 0; x < g.input_sizes()[j]; ++x) {
            out.povms[j][x].assign(g.output_sizes()[j], Matrix::Zero(1, 1));
            out.povms[j][x][s.tables[j][x]] = Matrix::Ones(1, 1);
        }
    }
    return out;
}

CQGame cq_from_game(const Game& g) {
    const Game base = g;
    std::vector<std::size_t> dims(g.output_sizes().begin(), g.output_sizes().end());
    CQGame::VerifierFn fn = [base](std::span<const std::size_t> x) {
        const std::size_t na = base.output_space();
        Matrix v = Matrix::Zero(na, na);
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple a = index_to_tuple(ai, base.output_sizes());
            if (base.predicate(x, a)) v(ai, ai) = 1.0;
        }
        return v;
    };
    return CQGame(g.input_sizes(), std::move(dims), g.mu(), std::move(fn));
}

CQStrategy cq_from_quantum(const Game& g, const QuantumStrategy& s) {
    validate_quantum_strategy(s);
    const std::size_t k = g.players();
    CQStrategy out;
    out.env_dims = s.env_dims;
    out.answer_dims.assign(g.output_sizes().begin(), g.output_sizes().end());
    // shared state: xi on the E registers, |0> on each answer register,
    // interleaved (E_1 A_1)(E_2 A_2)...
    std::vector<std::size_t> dims;
    for (std::size_t j = 0; j < k; ++j) {
        dims.push_back(s.env_dims[j]);
        dims.push_back(out.answer_dims[j]);
    }
    const std::size_t D = space_size(dims);
    Vector state = Vector::Zero(D);
    std::vector<std::size_t> edims = s.env_dims;
    const std::size_t de = space_size(edims);
    for (std::size_t e = 0; e < de; ++e) {
        const Tuple ed = index_to_tuple(e, edims);
        Tuple full(2 * k, 0);
        for (std::size_t j = 0; j < k; ++j) full[2 * j] = ed[j];
        state(tuple_to_index(full, dims)) = s.shared_state(e);
    }
    out.shared_state = std::move(state);

    out.unitaries.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t de_j = s.env_dims[j], da = out.answer_dims[j];
        const std::size_t d = de_j * da;
        for (std::size_t x = 0; x < g.input_sizes()[j]; ++x) {
            std::vector<Matrix> sq(da);
            for (std::size_t a = 0; a < da; ++a)
                sq[a] = matrix_function_psd(s.povms[j][x][a],
                                            [](double t) { return std::sqrt(t); }, true);
            // isometry |e>|0> -> sum_a sqrt(M_a)|e>|a>; its columns are
            // orthonormal because the POVM sums to identity.
            Matrix iso = Matrix::Zero(d, de_j);
            for (std::size_t e = 0; e < de_j; ++e)
                for (std::size_t a = 0; a < da; ++a)
                    for (std::size_t ep = 0; ep < de_j; ++ep)
                        iso(ep * da + a, e) = sq[a](ep, e);
            Eigen::HouseholderQR<Matrix> qr(iso);
            const Matrix q = qr.householderQ();
            // last d - de columns of q are an orthonormal completion
            Matrix full = Matrix::Zero(d, d);
            std::size_t extra = de_j;
            for (std::size_t cidx = 0; cidx < d; ++cidx) {
                const std::size_t e = cidx / da, a = cidx % da;
                if (a == 0)
                    full.col(cidx) = iso.col(e);
                else
                    full.col(cidx) = q.col(extra++);
            }
            out.unitaries[j].push_back(std::move(full));
        }
    }
    return out;
}

}  // namespace repval
