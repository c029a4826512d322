#include "repval/advice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "repval/rng.hpp"

namespace repval {

using nlohmann::json;

std::string x_label(std::size_t i, std::size_t j) {
    return "X(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
std::string xp_label(std::size_t i, std::size_t j) {
    return "X'(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
std::string e_label(std::size_t j) { return "E(" + std::to_string(j) + ")"; }
std::string a_label(std::size_t i, std::size_t j) {
    return "A(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
std::string r_label(std::size_t i) { return "R(" + std::to_string(i) + ")"; }

std::vector<std::string> player_labels(std::size_t n, std::size_t k, std::size_t j) {
    (void)k;
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(x_label(i, j));
    for (std::size_t i = 1; i <= n; ++i) out.push_back(xp_label(i, j));
    out.push_back(e_label(j));
    for (std::size_t i = 1; i <= n; ++i) out.push_back(a_label(i, j));
    return out;
}

std::string reduction_report_to_json(const ReductionReport& r) {
    json out;
    out["lambda"] = r.lambda;
    out["coord_divergences"] = r.coord_divergences;
    out["mutual_informations"] = r.mutual_informations;
    out["coord_win_probs"] = r.coord_win_probs;
    out["delta"] = r.delta;
    if (r.coordinate) {
        out["coordinate"] = *r.coordinate;
        out["rounding_k"] = r.rounding_k;
        out["k_f0_f1"] = r.k_f0_f1;
        out["pr_f0"] = r.pr_f0;
        out["pr_f1"] = r.pr_f1;
        out["kappa"] = r.kappa;
    }
    return out.dump(2);
}

std::string protocol_c_result_to_json(const ProtocolCResult& r) {
    json out;
    out["omega"] = r.omega;
    out["kappa"] = r.kappa;
    out["delta_bound"] = r.delta_bound;
    out["lambda"] = r.lambda;
    out["exact"] = r.exact;
    if (!r.exact) out["samples"] = r.samples;
    return out.dump(2);
}

namespace {

struct AdviceIndexing {
    std::size_t n, k;
    std::vector<std::size_t> input_sizes, answer_sizes, env_dims;
    std::vector<std::size_t> flag_coords;  // 0-based coordinates carrying R flags

    RegisterLayout layout() const {
        std::vector<Register> regs;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 1; j <= k; ++j) regs.push_back({x_label(i, j), input_sizes[j - 1]});
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 1; j <= k; ++j) regs.push_back({xp_label(i, j), input_sizes[j - 1]});
        for (std::size_t j = 1; j <= k; ++j) regs.push_back({e_label(j), env_dims[j - 1]});
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 1; j <= k; ++j) regs.push_back({a_label(i, j), answer_sizes[j - 1]});
        for (auto i : flag_coords) regs.push_back({r_label(i + 1), 2});
        return RegisterLayout(regs);
    }
};

std::vector<std::string> coord_x_labels(std::size_t k, std::size_t i) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= k; ++j) out.push_back(x_label(i + 1, j));
    return out;
}

std::vector<std::string> coord_xxp_labels(std::size_t k, std::size_t i) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= k; ++j) out.push_back(x_label(i + 1, j));
    for (std::size_t j = 1; j <= k; ++j) out.push_back(xp_label(i + 1, j));
    return out;
}

std::vector<std::string> coord_a_labels(std::size_t k, std::size_t i) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= k; ++j) out.push_back(a_label(i + 1, j));
    return out;
}

std::vector<std::string> z_minus_labels(const AdviceState& adv, std::size_t j) {
    std::vector<std::string> out;
    for (std::size_t jj = 1; jj <= adv.k; ++jj) {
        if (jj == j) continue;
        for (std::size_t i = 1; i <= adv.n; ++i) out.push_back(xp_label(i, jj));
        for (std::size_t i = 1; i <= adv.n; ++i) out.push_back(x_label(i, jj));
        out.push_back(e_label(jj));
        for (std::size_t i = 1; i <= adv.n; ++i) out.push_back(a_label(i, jj));
    }
    return out;
}

// diag of the single-game input distribution over the coordinate registers
Matrix mu_diagonal(const AdviceState& adv) {
    const std::size_t nx = space_size(adv.input_sizes);
    Matrix mu = Matrix::Zero(nx, nx);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, adv.input_sizes);
        mu(xi, xi) = adv.cq ? adv.cq_game->mu_prob(x) : adv.game->mu_prob(x);
    }
    return mu;
}

// Winning projector of coordinate i for input u, on the A(i,.) registers.
Matrix win_projector_classical(const Game& g, std::span<const std::size_t> u) {
    const std::size_t na = g.output_space();
    Matrix v = Matrix::Zero(na, na);
    for (std::size_t ai = 0; ai < na; ++ai) {
        const Tuple a = index_to_tuple(ai, g.output_sizes());
        if (g.predicate(u, a)) v(ai, ai) = 1.0;
    }
    return v;
}

double win_probability_at(const AdviceState& adv, const LabeledState& state, std::size_t i,
                          std::span<const std::size_t> u) {
    const Matrix v = adv.cq ? adv.cq_game->verifier(u)
                            : win_projector_classical(*adv.game, u);
    return local_expectation(state, v, coord_a_labels(adv.k, i));
}

// Pr[coordinate i wins] with the inputs read from X(i,.): block-diagonal
// sum_u |u><u| ox V_u on X(i,.) + A(i,.).
double coord_win_probability(const AdviceState& adv, std::size_t i) {
    const std::size_t nx = space_size(adv.input_sizes);
    const std::size_t na = space_size(adv.answer_sizes);
    Matrix op = Matrix::Zero(nx * na, nx * na);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple u = index_to_tuple(xi, adv.input_sizes);
        const Matrix v =
            adv.cq ? adv.cq_game->verifier(u) : win_projector_classical(*adv.game, u);
        op.block(xi * na, xi * na, na, na) = v;
    }
    std::vector<std::string> labels = coord_x_labels(adv.k, i);
    const auto al = coord_a_labels(adv.k, i);
    labels.insert(labels.end(), al.begin(), al.end());
    return local_expectation(adv.state, op, labels);
}

}  // namespace

AdviceState build_psi0(const Game& g, std::size_t n, const QuantumStrategy& s) {
    if (!g.is_free()) throw InvariantError("advice state needs a free game");
    validate_quantum_strategy(s);
    const std::size_t k = g.players();
    if (s.env_dims.size() != k) throw DimensionError("strategy player count mismatch");

    AdviceIndexing ix{n, k, g.input_sizes(), g.output_sizes(), s.env_dims, {}};
    // budget gate with a size estimate before touching memory
    double est = 1;
    for (std::size_t j = 0; j < k; ++j)
        est *= std::pow(static_cast<double>(g.input_sizes()[j]), 2.0 * n) *
               std::pow(static_cast<double>(g.output_sizes()[j]), static_cast<double>(n)) *
               static_cast<double>(s.env_dims[j]);
    if (est > static_cast<double>(kAdviceDimCap))
        throw BudgetError("advice state dimension " + std::to_string(est) + " exceeds cap " +
                          std::to_string(kAdviceDimCap));

    const RegisterLayout layout = ix.layout();
    const std::size_t D = layout.total_dim();
    check_alloc(D * sizeof(cxd), "advice state");

    // per-player composite alphabets of the repeated game
    std::vector<std::size_t> xn_sizes(k), an_sizes(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t px = 1, pa = 1;
        for (std::size_t i = 0; i < n; ++i) {
            px *= g.input_sizes()[j];
            pa *= g.output_sizes()[j];
        }
        xn_sizes[j] = px;
        an_sizes[j] = pa;
        if (s.povms[j].size() != px || s.povms[j][0].size() != pa)
            throw DimensionError("strategy is not for the n-fold repetition of the game");
    }

    // sqrt of every POVM element once
    std::vector<std::vector<std::vector<Matrix>>> sq(k);
    for (std::size_t j = 0; j < k; ++j) {
        sq[j].resize(xn_sizes[j]);
        for (std::size_t x = 0; x < xn_sizes[j]; ++x) {
            sq[j][x].reserve(an_sizes[j]);
            for (std::size_t a = 0; a < an_sizes[j]; ++a)
                sq[j][x].push_back(
                    matrix_function_psd(s.povms[j][x][a], [](double t) { return std::sqrt(t); }, true));
        }
    }

    // index helpers over the (i,j) blocks
    std::vector<std::size_t> xdims(n * k), adims(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            xdims[i * k + j] = g.input_sizes()[j];
            adims[i * k + j] = g.output_sizes()[j];
        }
    const std::size_t NX = space_size(xdims), NA = space_size(adims), NE = space_size(s.env_dims);

    const auto& marginals = std::get<ProductMu>(g.mu()).marginals;
    Vector psi = Vector::Zero(D);
    for (std::size_t xi = 0; xi < NX; ++xi) {
        const Tuple xd = index_to_tuple(xi, xdims);
        double mu = 1;
        for (std::size_t t = 0; t < n * k; ++t) mu *= marginals[t % k][xd[t]];
        if (mu == 0) continue;
        const double amp = std::sqrt(mu);
        Tuple xc(k, 0);  // per-player composite input
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) xc[j] = xc[j] * g.input_sizes()[j] + xd[i * k + j];

        for (std::size_t ai = 0; ai < NA; ++ai) {
            const Tuple ad = index_to_tuple(ai, adims);
            Tuple ac(k, 0);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < n; ++i) ac[j] = ac[j] * g.output_sizes()[j] + ad[i * k + j];
            Matrix op = Matrix::Ones(1, 1);
            for (std::size_t j = 0; j < k; ++j) op = kron(op, sq[j][xc[j]][ac[j]]);
            const Vector v = op * s.shared_state;
            if (v.norm() < 1e-300) continue;
            // composite offset: X block, X' block, E block, A block
            std::size_t base = 0;
            for (std::size_t t = 0; t < n * k; ++t) base += xd[t] * layout.stride(t);
            for (std::size_t t = 0; t < n * k; ++t) base += xd[t] * layout.stride(n * k + t);
            for (std::size_t t = 0; t < n * k; ++t) base += ad[t] * layout.stride(2 * n * k + k + t);
            for (std::size_t e = 0; e < NE; ++e) {
                const Tuple ed = index_to_tuple(e, s.env_dims);
                std::size_t off = base;
                for (std::size_t j = 0; j < k; ++j) off += ed[j] * layout.stride(2 * n * k + j);
                psi(off) = amp * v(e);
            }
        }
    }

    AdviceState adv;
    adv.state = LabeledState::pure(layout, std::move(psi));
    adv.n = n;
    adv.k = k;
    adv.input_sizes = g.input_sizes();
    adv.answer_sizes = g.output_sizes();
    adv.game = g;
    return adv;
}

AdviceState condition_win_all(const AdviceState& adv) {
    if (adv.cq) throw InvariantError("condition_win_all applies to classical-output advice states");
    const Game& g = *adv.game;
    const RegisterLayout& layout = adv.state.layout();
    const Vector& v = adv.state.vec();
    Vector kept = Vector::Zero(v.size());
    double lambda = 0;
    const std::size_t nk = adv.n * adv.k;
    Tuple x(adv.k), a(adv.k);
    // cache predicate over (x-coordinate tuple, a-coordinate tuple)
    const std::size_t nx = space_size(adv.input_sizes), na = space_size(adv.answer_sizes);
    std::vector<char> table(nx * na);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple xt = index_to_tuple(xi, adv.input_sizes);
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Tuple at = index_to_tuple(ai, adv.answer_sizes);
            table[xi * na + ai] = g.predicate(xt, at) ? 1 : 0;
        }
    }
    for (Eigen::Index f = 0; f < v.size(); ++f) {
        if (v(f) == cxd(0, 0)) continue;
        bool win = true;
        for (std::size_t i = 0; i < adv.n && win; ++i) {
            std::size_t xi = 0, ai = 0;
            for (std::size_t j = 0; j < adv.k; ++j) {
                xi = xi * adv.input_sizes[j] +
                     layout.digit(static_cast<std::size_t>(f), i * adv.k + j);
                ai = ai * adv.answer_sizes[j] +
                     layout.digit(static_cast<std::size_t>(f), 2 * nk + adv.k + i * adv.k + j);
            }
            win = table[xi * na + ai] != 0;
        }
        if (win) {
            kept(f) = v(f);
            lambda += std::norm(v(f));
        }
    }
    if (lambda <= 1e-300)
        throw ZeroProbabilityEvent("win-all event has probability zero; state undefined");
    AdviceState out = adv;
    out.state = LabeledState::pure(layout, kept / std::sqrt(lambda));
    out.lambda = lambda;
    out.is_conditioned = true;
    out.conditioning = "win-all";
    out.conditioned_coords.clear();
    for (std::size_t i = 0; i < adv.n; ++i) out.conditioned_coords.push_back(i);
    return out;
}

AdviceState condition_win_subset_cq(const CQGame& g, std::size_t n, const CQStrategy& s,
                                    std::span<const std::size_t> c) {
    if (!g.is_free()) throw InvariantError("advice state needs a free game");
    validate_cq_strategy(s);
    const std::size_t k = g.players();

    // composite alphabets of the repeated strategy
    std::vector<std::size_t> xn_sizes(k), an_dims(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t px = 1, pa = 1;
        for (std::size_t i = 0; i < n; ++i) {
            px *= g.input_sizes()[j];
            pa *= g.answer_dims()[j];
        }
        xn_sizes[j] = px;
        an_dims[j] = pa;
        if (s.unitaries[j].size() != px || s.answer_dims[j] != pa)
            throw DimensionError("cq strategy is not for the n-fold repetition");
    }

    std::vector<std::size_t> per_answer(k);
    for (std::size_t j = 0; j < k; ++j) per_answer[j] = g.answer_dims()[j];
    AdviceIndexing ix{n, k, g.input_sizes(), per_answer, s.env_dims,
                      std::vector<std::size_t>(c.begin(), c.end())};
    double est = std::pow(2.0, static_cast<double>(c.size()));
    for (std::size_t j = 0; j < k; ++j)
        est *= std::pow(static_cast<double>(g.input_sizes()[j]), 2.0 * n) *
               static_cast<double>(an_dims[j]) * static_cast<double>(s.env_dims[j]);
    if (est > static_cast<double>(kAdviceDimCap))
        throw BudgetError("advice state dimension " + std::to_string(est) + " exceeds cap " +
                          std::to_string(kAdviceDimCap));

    const RegisterLayout layout = ix.layout();
    const std::size_t D = layout.total_dim();
    check_alloc(D * sizeof(cxd), "cq advice state");

    // EA-sublayout in advice order (E block then A block)
    std::vector<Register> ea_regs;
    for (std::size_t j = 1; j <= k; ++j) ea_regs.push_back({e_label(j), s.env_dims[j - 1]});
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= k; ++j) ea_regs.push_back({a_label(i, j), g.answer_dims()[j - 1]});
    const RegisterLayout ea_layout{ea_regs};

    // strategy state lives on (E_1 A_(.,1)) ... (E_k A_(.,k)); permute once
    std::vector<std::size_t> strat_dims;
    for (std::size_t j = 0; j < k; ++j) {
        strat_dims.push_back(s.env_dims[j]);
        for (std::size_t i = 0; i < n; ++i) strat_dims.push_back(g.answer_dims()[j]);
    }
    // position in strategy order for each ea_layout register
    std::vector<std::size_t> strat_pos;  // ea register t -> strategy register index
    for (std::size_t j = 0; j < k; ++j) strat_pos.push_back(j * (n + 1));  // E(j)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) strat_pos.push_back(j * (n + 1) + 1 + i);  // A(i,j)
    std::vector<std::size_t> ea_dims;
    for (const auto& r : ea_regs) ea_dims.push_back(r.dim);
    Vector xi0(ea_layout.total_dim());
    {
        for (std::size_t idx = 0; idx < static_cast<std::size_t>(xi0.size()); ++idx) {
            const Tuple digits = index_to_tuple(idx, ea_dims);
            Tuple old(strat_dims.size());
            for (std::size_t t = 0; t < strat_pos.size(); ++t) old[strat_pos[t]] = digits[t];
            xi0(idx) = s.shared_state(tuple_to_index(old, strat_dims));
        }
    }

    // per-player unitaries act on E(j) + A(1,j)..A(n,j), but the strategy
    // matrices are indexed (E_j, A^1..A^n) contiguously -- same order here.
    std::vector<std::vector<std::string>> player_on(k);
    for (std::size_t j = 1; j <= k; ++j) {
        player_on[j - 1].push_back(e_label(j));
        for (std::size_t i = 1; i <= n; ++i) player_on[j - 1].push_back(a_label(i, j));
    }

    std::vector<std::size_t> xdims(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) xdims[i * k + j] = g.input_sizes()[j];
    const std::size_t NX = space_size(xdims);
    const auto& marginals = std::get<ProductMu>(g.mu()).marginals;

    Vector psi = Vector::Zero(D);
    const std::size_t flag_count = c.size();
    std::vector<std::size_t> flag_dims(flag_count, 2);

    for (std::size_t xi = 0; xi < NX; ++xi) {
        const Tuple xd = index_to_tuple(xi, xdims);
        double mu = 1;
        for (std::size_t t = 0; t < n * k; ++t) mu *= marginals[t % k][xd[t]];
        if (mu == 0) continue;
        const double amp = std::sqrt(mu);
        Tuple xc(k, 0);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) xc[j] = xc[j] * g.input_sizes()[j] + xd[i * k + j];

        LabeledState played = LabeledState::pure(ea_layout, xi0);
        for (std::size_t j = 0; j < k; ++j)
            played = apply_local_unitary(played, s.unitaries[j][xc[j]], player_on[j]);

        for (std::size_t rflags = 0; rflags < (std::size_t(1) << flag_count); ++rflags) {
            const Tuple rbits = index_to_tuple(rflags, flag_dims);
            LabeledState branch = played;
            for (std::size_t t = 0; t < flag_count; ++t) {
                const std::size_t coord = c[t];
                Tuple u(k);
                for (std::size_t j = 0; j < k; ++j) u[j] = xd[coord * k + j];
                const Matrix v = g.verifier(u);
                const Matrix op =
                    rbits[t] == 1
                        ? matrix_function_psd(v, [](double t2) { return std::sqrt(t2); }, true)
                        : matrix_function_psd(Matrix(Matrix::Identity(v.rows(), v.cols()) - v),
                                              [](double t2) { return std::sqrt(std::max(0.0, t2)); },
                                              true);
                branch = apply_local_operator(branch, op, coord_a_labels(k, coord));
            }
            // scatter amplitudes into the big vector
            std::size_t base = 0;
            for (std::size_t t = 0; t < n * k; ++t) base += xd[t] * layout.stride(t);
            for (std::size_t t = 0; t < n * k; ++t) base += xd[t] * layout.stride(n * k + t);
            for (std::size_t t = 0; t < flag_count; ++t)
                base += rbits[t] * layout.stride(2 * n * k + k + n * k + t);
            const Vector& bv = branch.vec();
            for (std::size_t eidx = 0; eidx < static_cast<std::size_t>(bv.size()); ++eidx) {
                if (bv(eidx) == cxd(0, 0)) continue;
                const Tuple digits = index_to_tuple(eidx, ea_dims);
                std::size_t off = base;
                for (std::size_t t = 0; t < digits.size(); ++t)
                    off += digits[t] * layout.stride(2 * n * k + t);
                psi(off) = amp * bv(eidx);
            }
        }
    }

    LabeledState full = LabeledState::pure(layout, std::move(psi));
    // condition on every flag reading 1
    std::vector<std::string> flag_labels;
    std::vector<std::size_t> ones(flag_count, 1);
    for (auto i : c) flag_labels.push_back(r_label(i + 1));
    const Projection proj = project_component(full, flag_labels, ones);
    if (!proj.post) throw ZeroProbabilityEvent("win event on the subset has probability zero");

    AdviceState adv;
    adv.state = proj.post->normalized();
    adv.n = n;
    adv.k = k;
    adv.input_sizes = g.input_sizes();
    adv.answer_sizes = per_answer;
    adv.cq = true;
    adv.cq_game = g;
    adv.conditioned_coords.assign(c.begin(), c.end());
    adv.lambda = proj.prob;
    adv.is_conditioned = true;
    adv.conditioning = "win-subset";
    return adv;
}

ReductionReport measure_properties(const AdviceState& adv) {
    ReductionReport rep;
    rep.lambda = adv.lambda;
    const Matrix mu = mu_diagonal(adv);
    for (std::size_t i = 0; i < adv.n; ++i) {
        rep.coord_win_probs.push_back(coord_win_probability(adv, i));
        const Matrix rho = partial_trace(adv.state, coord_x_labels(adv.k, i)).dens();
        rep.coord_divergences.push_back(relative_entropy(rho, mu));
        std::vector<double> mi_row;
        for (std::size_t j = 1; j <= adv.k; ++j) {
            const std::vector<std::string> xi{x_label(i + 1, j)};
            mi_row.push_back(mutual_information(adv.state, xi, z_minus_labels(adv, j)));
        }
        rep.mutual_informations.push_back(std::move(mi_row));
    }
    double delta = 0;
    for (double d : rep.coord_divergences) delta = std::max(delta, d);
    for (const auto& row : rep.mutual_informations)
        for (double d : row) delta = std::max(delta, d);
    rep.delta = delta;
    return rep;
}

ReductionReport round_and_play(const AdviceState& adv, std::size_t coordinate) {
    if (coordinate >= adv.n) throw DimensionError("round_and_play: coordinate out of range");
    ReductionReport rep = measure_properties(adv);
    rep.coordinate = coordinate;
    const std::size_t i = coordinate;
    const std::size_t k = adv.k;
    const std::size_t nx = space_size(adv.input_sizes);

    // sigma: measured distribution of X(i,.) (with the copy registers)
    std::vector<double> sigma(nx, 0.0);
    std::vector<std::optional<LabeledState>> phi_u(nx);
    for (std::size_t u = 0; u < nx; ++u) {
        const Tuple ut = index_to_tuple(u, adv.input_sizes);
        Tuple uu = ut;
        uu.insert(uu.end(), ut.begin(), ut.end());
        const Projection p = project_component(adv.state, coord_xxp_labels(k, i), uu);
        sigma[u] = p.prob;
        if (p.post && p.prob > 1e-14) phi_u[u] = p.post->normalized();
    }

    // per-player rounding unitaries from the per-input conditioned states
    std::vector<std::vector<std::optional<Matrix>>> units(k);
    for (std::size_t j = 1; j <= k; ++j) {
        units[j - 1].resize(adv.input_sizes[j - 1]);
        for (std::size_t uj = 0; uj < adv.input_sizes[j - 1]; ++uj) {
            const std::vector<std::string> on{x_label(i + 1, j), xp_label(i + 1, j)};
            const std::vector<std::size_t> outcome{uj, uj};
            const Projection p = project_component(adv.state, on, outcome);
            if (!p.post || p.prob <= 1e-14) continue;
            const LabeledState cond = p.post->normalized();
            units[j - 1][uj] = uhlmann_unitary(cond, adv.state, player_labels(adv.n, k, j));
        }
    }

    auto rounded_state = [&](const Tuple& ut) {
        LabeledState moved = adv.state;
        for (std::size_t j = 1; j <= k; ++j) {
            const auto& u = units[j - 1][ut[j - 1]];
            if (u) moved = apply_local_unitary(moved, *u, player_labels(adv.n, k, j));
        }
        return moved;
    };

    double ex_k = 0, pr_f0 = 0, pr_f1 = 0, kappa = 0;
    for (std::size_t u = 0; u < nx; ++u) {
        const Tuple ut = index_to_tuple(u, adv.input_sizes);
        const double mu_u = adv.cq ? adv.cq_game->mu_prob(ut) : adv.game->mu_prob(ut);
        const bool have_sigma = sigma[u] > 1e-14 && phi_u[u].has_value();
        if (mu_u == 0 && !have_sigma) continue;
        const LabeledState moved = rounded_state(ut);
        const double win_moved = win_probability_at(adv, moved, i, ut);
        kappa += mu_u * win_moved;
        if (have_sigma) {
            const double overlap = std::abs(phi_u[u]->vec().dot(moved.vec()));
            ex_k += sigma[u] * (1.0 - std::min(1.0, overlap));
            pr_f1 += sigma[u] * win_moved;
            pr_f0 += sigma[u] * win_probability_at(adv, *phi_u[u], i, ut);
        }
    }

    rep.rounding_k = ex_k;
    rep.pr_f0 = pr_f0;
    rep.pr_f1 = pr_f1;
    rep.kappa = kappa;
    rep.k_f0_f1 = binary_bures_sq(pr_f0, pr_f1);

    double mi_sum = 0;
    for (double v : rep.mutual_informations[i]) mi_sum += v;
    if (rep.k_f0_f1 > ex_k + 1e-6)
        throw InvariantError("rounding chain violated: K(F0,F1) > E_x K");
    if (ex_k > 4.0 * static_cast<double>(k) * mi_sum + 1e-6)
        throw InvariantError("rounding chain violated: E_x K exceeds the mutual-information bound");
    return rep;
}

// --- Protocol C ---

namespace {

struct TranscriptKey {
    Tuple x_rows, a_rows;  // per coordinate in C: full input/answer tuples
    bool operator<(const TranscriptKey& o) const {
        if (x_rows != o.x_rows) return x_rows < o.x_rows;
        return a_rows < o.a_rows;
    }
};

}  // namespace

ProtocolCResult protocol_c_classical(const Game& g, std::size_t n, const ClassicalStrategy& s,
                                     std::span<const std::size_t> c, bool exact,
                                     std::uint64_t seed, std::size_t samples) {
    if (!g.is_free()) throw InvariantError("protocol c needs a free game");
    const std::size_t k = g.players();
    const Game gn = repeat(g, n);
    for (std::size_t j = 0; j < k; ++j)
        if (s.tables[j].size() != gn.input_sizes()[j])
            throw InvariantError("strategy is not for the n-fold repetition");

    // full joint over x in X^n (player-major composite symbols)
    const std::size_t NX = gn.input_space();
    check_alloc(NX * sizeof(double) * 4, "protocol c joint");
    std::vector<double> psi(NX, 0.0);
    std::vector<char> winc(NX, 0);
    double lambda = 0;

    std::vector<std::size_t> per_player_xn = gn.input_sizes();
    auto coord_input = [&](const Tuple& comp, std::size_t i) {
        Tuple u(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> dims(n, g.input_sizes()[j]);
            u[j] = index_to_tuple(comp[j], dims)[i];
        }
        return u;
    };
    auto coord_answer = [&](const Tuple& comp, std::size_t i) {
        Tuple a(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> dims(n, g.output_sizes()[j]);
            a[j] = index_to_tuple(s.tables[j][comp[j]], dims)[i];
        }
        return a;
    };

    for (std::size_t xi = 0; xi < NX; ++xi) {
        const Tuple comp = index_to_tuple(xi, per_player_xn);
        const double p = gn.mu_prob(comp);
        psi[xi] = p;
        if (p == 0) continue;
        bool win = true;
        for (auto i : c)
            if (!g.predicate(coord_input(comp, i), coord_answer(comp, i))) {
                win = false;
                break;
            }
        winc[xi] = win ? 1 : 0;
        if (win) lambda += p;
    }
    if (lambda <= 0) throw ZeroProbabilityEvent("win event on C has probability zero");

    ProtocolCResult out;
    out.lambda = lambda;
    out.exact = exact;

    // phi grouped by transcript (x_C, a_C)
    std::map<TranscriptKey, std::vector<std::pair<std::size_t, double>>> groups;
    for (std::size_t xi = 0; xi < NX; ++xi) {
        if (!winc[xi] || psi[xi] == 0) continue;
        const Tuple comp = index_to_tuple(xi, per_player_xn);
        TranscriptKey key;
        for (auto i : c) {
            const Tuple u = coord_input(comp, i);
            const Tuple a = coord_answer(comp, i);
            key.x_rows.insert(key.x_rows.end(), u.begin(), u.end());
            key.a_rows.insert(key.a_rows.end(), a.begin(), a.end());
        }
        groups[key].push_back({xi, psi[xi] / lambda});
    }

    // conditional-independence factorization across player columns
    for (const auto& [key, members] : groups) {
        double total = 0;
        for (const auto& [xi, p] : members) total += p;
        std::vector<std::map<std::size_t, double>> col_marginals(k);
        for (const auto& [xi, p] : members) {
            const Tuple comp = index_to_tuple(xi, per_player_xn);
            for (std::size_t j = 0; j < k; ++j) col_marginals[j][comp[j]] += p / total;
        }
        std::map<std::size_t, double> joint;
        for (const auto& [xi, p] : members) joint[xi] = p / total;
        // check over the full product support
        std::vector<std::vector<std::pair<std::size_t, double>>> cols(k);
        for (std::size_t j = 0; j < k; ++j)
            cols[j].assign(col_marginals[j].begin(), col_marginals[j].end());
        std::vector<std::size_t> pick(k, 0);
        for (;;) {
            Tuple comp(k);
            double prod = 1;
            for (std::size_t j = 0; j < k; ++j) {
                comp[j] = cols[j][pick[j]].first;
                prod *= cols[j][pick[j]].second;
            }
            const std::size_t xi = tuple_to_index(comp, per_player_xn);
            const double actual = joint.count(xi) ? joint[xi] : 0.0;
            if (std::abs(actual - prod) > 1e-12)
                throw InvariantError("conditioned transcript distribution does not factorize");
            std::size_t j = 0;
            while (j < k && ++pick[j] == cols[j].size()) pick[j++] = 0;
            if (j == k) break;
        }
    }

    // omega and the measured divergence
    std::vector<std::size_t> free_coords;
    for (std::size_t i = 0; i < n; ++i)
        if (std::find(c.begin(), c.end(), i) == c.end()) free_coords.push_back(i);
    if (free_coords.empty()) throw InvariantError("protocol c: no free coordinates");

    double omega = 0;
    for (auto i : free_coords) {
        for (std::size_t xi = 0; xi < NX; ++xi) {
            if (!winc[xi] || psi[xi] == 0) continue;
            const Tuple comp = index_to_tuple(xi, per_player_xn);
            if (g.predicate(coord_input(comp, i), coord_answer(comp, i)))
                omega += psi[xi] / lambda / static_cast<double>(free_coords.size());
        }
    }
    out.omega = omega;

    const std::size_t nx1 = g.input_space();
    double delta = 0;
    for (auto i : free_coords) {
        for (const auto& [key, members] : groups) {
            double group_p = 0;
            std::vector<double> cond(nx1, 0.0);
            for (const auto& [xi, p] : members) {
                group_p += p;
                const Tuple comp = index_to_tuple(xi, per_player_xn);
                cond[tuple_to_index(coord_input(comp, i), g.input_sizes())] += p;
            }
            double dkl = 0;
            for (std::size_t u = 0; u < nx1; ++u) {
                if (cond[u] == 0) continue;
                const double pu = cond[u] / group_p;
                const double qu = g.mu_prob(index_to_tuple(u, g.input_sizes()));
                dkl += pu * std::log2(pu / qu);
            }
            delta += group_p * dkl / static_cast<double>(free_coords.size());
        }
    }
    out.delta_bound = delta;

    // kappa: play the single game through the sampled transcript
    auto play_win_probability = [&](std::size_t i,
                                    const std::vector<std::pair<std::size_t, double>>& members,
                                    const Tuple& u) {
        double group_p = 0;
        for (const auto& [xi, p] : members) group_p += p;
        // per-player answer distribution at coordinate i
        std::vector<std::vector<double>> ans(k);
        for (std::size_t j = 0; j < k; ++j) ans[j].assign(g.output_sizes()[j], 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            std::map<std::size_t, double> col;  // player column -> conditional probability
            for (const auto& [xi, p] : members) {
                const Tuple comp = index_to_tuple(xi, per_player_xn);
                col[comp[j]] += p / group_p;
            }
            double mass = 0;
            std::vector<std::size_t> dims(n, g.input_sizes()[j]);
            std::vector<std::size_t> adims(n, g.output_sizes()[j]);
            for (const auto& [cj, p] : col) {
                if (index_to_tuple(cj, dims)[i] == u[j]) mass += p;
            }
            if (mass <= 0) {
                // abort: uniform random answer symbol
                for (auto& v : ans[j]) v = 1.0 / static_cast<double>(g.output_sizes()[j]);
                continue;
            }
            for (const auto& [cj, p] : col) {
                if (index_to_tuple(cj, dims)[i] != u[j]) continue;
                const std::size_t aj = index_to_tuple(s.tables[j][cj], adims)[i];
                ans[j][aj] += p / mass;
            }
        }
        // expectation of the predicate over the product answer distribution
        double win = 0;
        Tuple a(k, 0);
        bool done = false;
        while (!done) {
            double prod = 1;
            for (std::size_t j = 0; j < k; ++j) prod *= ans[j][a[j]];
            if (prod > 0 && g.predicate(u, a)) win += prod;
            done = true;
            for (std::size_t j = k; j-- > 0;) {
                if (++a[j] < g.output_sizes()[j]) {
                    done = false;
                    break;
                }
                a[j] = 0;
            }
        }
        return win;
    };

    double kappa = 0;
    if (exact) {
        for (auto i : free_coords) {
            for (const auto& [key, members] : groups) {
                double group_p = 0;
                for (const auto& [xi, p] : members) group_p += p;
                for (std::size_t ui = 0; ui < nx1; ++ui) {
                    const Tuple u = index_to_tuple(ui, g.input_sizes());
                    const double mu = g.mu_prob(u);
                    if (mu == 0) continue;
                    kappa += group_p * mu * play_win_probability(i, members, u) /
                             static_cast<double>(free_coords.size());
                }
            }
        }
    } else {
        if (samples == 0) throw InvariantError("protocol c: sampling mode needs samples >= 1");
        out.samples = samples;
        Rng root = Rng::seeded(seed);
        std::vector<std::pair<TranscriptKey, double>> group_probs;
        for (const auto& [key, members] : groups) {
            double p = 0;
            for (const auto& [xi, q] : members) p += q;
            group_probs.push_back({key, p});
        }
        double acc = 0;
        for (std::size_t t = 0; t < samples; ++t) {
            Rng rng = root.child(t);
            const std::size_t i = free_coords[rng.integer(free_coords.size())];
            double r = rng.uniform();
            std::size_t gidx = 0;
            while (gidx + 1 < group_probs.size() && r > group_probs[gidx].second) {
                r -= group_probs[gidx].second;
                ++gidx;
            }
            // sample u from mu
            Tuple u(k);
            for (std::size_t j = 0; j < k; ++j) {
                double ru = rng.uniform();
                const auto& marg = std::get<ProductMu>(g.mu()).marginals[j];
                std::size_t v = 0;
                while (v + 1 < marg.size() && ru > marg[v]) {
                    ru -= marg[v];
                    ++v;
                }
                u[j] = v;
            }
            acc += play_win_probability(i, groups.at(group_probs[gidx].first), u);
        }
        kappa = acc / static_cast<double>(samples);
    }
    out.kappa = kappa;

    if (exact && out.kappa < out.omega - 4.0 * out.delta_bound - 1e-9)
        throw InvariantError("protocol c accounting violated: kappa < omega - 4 delta");
    return out;
}

}  // namespace repval
