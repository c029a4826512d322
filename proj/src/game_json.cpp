#include <algorithm>
#include <memory>

#include <json.hpp>

#include "repval/games.hpp"

namespace repval {

using nlohmann::json;

namespace {

const char* kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t b = bytes[i] << 16;
        if (i + 1 < bytes.size()) b |= bytes[i + 1] << 8;
        if (i + 2 < bytes.size()) b |= bytes[i + 2];
        out.push_back(kB64[(b >> 18) & 63]);
        out.push_back(kB64[(b >> 12) & 63]);
        out.push_back(i + 1 < bytes.size() ? kB64[(b >> 6) & 63] : '=');
        out.push_back(i + 2 < bytes.size() ? kB64[b & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw InvariantError("invalid base64 character");
    };
    if (text.size() % 4 != 0) throw InvariantError("truncated base64");
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const int a = val(text[i]), b = val(text[i + 1]), c = val(text[i + 2]), d = val(text[i + 3]);
        if (a < 0 || b < 0) throw InvariantError("malformed base64");
        out.push_back(static_cast<std::uint8_t>((a << 2) | (b >> 4)));
        if (c >= 0) out.push_back(static_cast<std::uint8_t>(((b & 15) << 4) | (c >> 2)));
        if (c >= 0 && d >= 0) out.push_back(static_cast<std::uint8_t>(((c & 3) << 6) | d));
    }
    return out;
}

json mu_to_json(const Mu& mu) {
    json out;
    if (const auto* p = std::get_if<ProductMu>(&mu)) {
        out["product"] = p->marginals;
    } else {
        out["explicit"] = std::get<ExplicitMu>(mu).probs;
    }
    return out;
}

Mu mu_from_json(const json& j) {
    if (j.contains("product")) {
        ProductMu p;
        p.marginals = j.at("product").get<std::vector<std::vector<double>>>();
        return p;
    }
    if (j.contains("explicit")) {
        ExplicitMu e;
        e.probs = j.at("explicit").get<std::vector<double>>();
        return e;
    }
    throw InvariantError("mu: expected \"product\" or \"explicit\"");
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j.at(0).size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = cxd(j.at(r).at(c).at(0).get<double>(), j.at(r).at(c).at(1).get<double>());
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(json::array({v(i).real(), v(i).imag()}));
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(i) = cxd(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>());
    return v;
}

// Below this dense-bitmap size the predicate ships as base64; above it, as an
// accepted-tuple list.
constexpr std::size_t kDenseLimit = std::size_t(1) << 20;

}  // namespace

std::string game_to_json(const Game& g) {
    json out;
    out["k"] = g.players();
    out["inputs"] = g.input_sizes();
    out["outputs"] = g.output_sizes();
    out["mu"] = mu_to_json(g.mu());
    const std::size_t nx = g.input_space(), na = g.output_space();
    if (nx * na <= kDenseLimit) {
        const auto bits = g.dense_predicate();
        std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        out["predicate"] = {{"dense", base64_encode(bytes)}};
    } else {
        json accept = json::array();
        for (std::size_t xi = 0; xi < nx; ++xi) {
            const Tuple x = index_to_tuple(xi, g.input_sizes());
            for (std::size_t ai = 0; ai < na; ++ai) {
                const Tuple a = index_to_tuple(ai, g.output_sizes());
                if (g.predicate(x, a)) {
                    Tuple row = x;
                    row.insert(row.end(), a.begin(), a.end());
                    accept.push_back(row);
                }
            }
        }
        out["predicate"] = {{"accept", std::move(accept)}};
    }
    return out.dump(2);
}

Game game_from_json(const std::string& text) {
    const json j = json::parse(text);
    auto inputs = j.at("inputs").get<std::vector<std::size_t>>();
    auto outputs = j.at("outputs").get<std::vector<std::size_t>>();
    if (j.contains("k") && j.at("k").get<std::size_t>() != inputs.size())
        throw InvariantError("game json: k does not match inputs length");
    Mu mu = mu_from_json(j.at("mu"));
    const std::size_t na = space_size(outputs);
    const json& pred = j.at("predicate");
    if (pred.contains("dense")) {
        const auto bytes = base64_decode(pred.at("dense").get<std::string>());
        const std::size_t nbits = space_size(inputs) * na;
        if (bytes.size() < (nbits + 7) / 8) throw InvariantError("game json: dense bitmap too short");
        std::vector<bool> bits(nbits);
        for (std::size_t i = 0; i < nbits; ++i) bits[i] = (bytes[i / 8] >> (i % 8)) & 1;
        return Game::from_dense(std::move(inputs), std::move(outputs), std::move(mu), std::move(bits));
    }
    if (pred.contains("accept")) {
        const std::size_t k = inputs.size();
        auto rows = pred.at("accept").get<std::vector<std::vector<std::size_t>>>();
        auto accepted = std::make_shared<std::vector<std::uint64_t>>();
        for (const auto& row : rows) {
            if (row.size() != 2 * k) throw InvariantError("game json: accept row length mismatch");
            const std::span<const std::size_t> xs(row.data(), k), as(row.data() + k, k);
            accepted->push_back(static_cast<std::uint64_t>(tuple_to_index(xs, inputs)) * na +
                                tuple_to_index(as, outputs));
        }
        std::sort(accepted->begin(), accepted->end());
        auto in = inputs;
        auto outsz = outputs;
        Game::PredicateFn fn = [accepted, in, outsz, na](std::span<const std::size_t> x,
                                                         std::span<const std::size_t> a) {
            const std::uint64_t key =
                static_cast<std::uint64_t>(tuple_to_index(x, in)) * na + tuple_to_index(a, outsz);
            return std::binary_search(accepted->begin(), accepted->end(), key);
        };
        return Game(std::move(inputs), std::move(outputs), std::move(mu), std::move(fn));
    }
    throw InvariantError("game json: predicate must contain \"dense\" or \"accept\"");
}

std::string cq_game_to_json(const CQGame& g) {
    json out;
    out["k"] = g.players();
    out["inputs"] = g.input_sizes();
    out["answer_dims"] = g.answer_dims();
    out["mu"] = mu_to_json(g.mu());
    json verifiers = json::array();
    const std::size_t nx = space_size(g.input_sizes());
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const Tuple x = index_to_tuple(xi, g.input_sizes());
        verifiers.push_back(matrix_to_json(g.verifier(x)));
    }
    out["verifiers"] = std::move(verifiers);
    return out.dump(2);
}

CQGame cq_game_from_json(const std::string& text) {
    const json j = json::parse(text);
    auto inputs = j.at("inputs").get<std::vector<std::size_t>>();
    auto dims = j.at("answer_dims").get<std::vector<std::size_t>>();
    Mu mu = mu_from_json(j.at("mu"));
    auto tables = std::make_shared<std::vector<Matrix>>();
    for (const auto& v : j.at("verifiers")) tables->push_back(matrix_from_json(v));
    if (tables->size() != space_size(inputs))
        throw InvariantError("cq game json: verifier count mismatch");
    auto in = inputs;
    CQGame::VerifierFn fn = [tables, in](std::span<const std::size_t> x) {
        return (*tables)[tuple_to_index(x, in)];
    };
    return CQGame(std::move(inputs), std::move(dims), std::move(mu), std::move(fn));
}

std::string strategy_to_json(const ClassicalStrategy& s) {
    json out;
    out["type"] = "classical";
    out["tables"] = s.tables;
    return out.dump(2);
}

std::string strategy_to_json(const QuantumStrategy& s) {
    json out;
    out["type"] = "quantum";
    out["env_dims"] = s.env_dims;
    out["state"] = vector_to_json(s.shared_state);
    json povms = json::array();
    for (const auto& per_player : s.povms) {
        json per_x = json::array();
        for (const auto& povm : per_player) {
            json elems = json::array();
            for (const auto& m : povm) elems.push_back(matrix_to_json(m));
            per_x.push_back(std::move(elems));
        }
        povms.push_back(std::move(per_x));
    }
    out["povms"] = std::move(povms);
    return out.dump(2);
}

std::string strategy_to_json(const CQStrategy& s) {
    json out;
    out["type"] = "cq";
    out["env_dims"] = s.env_dims;
    out["answer_dims"] = s.answer_dims;
    out["state"] = vector_to_json(s.shared_state);
    json us = json::array();
    for (const auto& per_player : s.unitaries) {
        json per_x = json::array();
        for (const auto& u : per_player) per_x.push_back(matrix_to_json(u));
        us.push_back(std::move(per_x));
    }
    out["unitaries"] = std::move(us);
    return out.dump(2);
}

std::variant<ClassicalStrategy, QuantumStrategy, CQStrategy> strategy_from_json(
    const std::string& text) {
    const json j = json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    if (type == "classical") {
        ClassicalStrategy s;
        s.tables = j.at("tables").get<std::vector<std::vector<std::size_t>>>();
        return s;
    }
    if (type == "quantum") {
        QuantumStrategy s;
        s.env_dims = j.at("env_dims").get<std::vector<std::size_t>>();
        s.shared_state = vector_from_json(j.at("state"));
        for (const auto& per_player : j.at("povms")) {
            std::vector<std::vector<Matrix>> px;
            for (const auto& povm : per_player) {
                std::vector<Matrix> elems;
                for (const auto& m : povm) elems.push_back(matrix_from_json(m));
                px.push_back(std::move(elems));
            }
            s.povms.push_back(std::move(px));
        }
        return s;
    }
    if (type == "cq") {
        CQStrategy s;
        s.env_dims = j.at("env_dims").get<std::vector<std::size_t>>();
        s.answer_dims = j.at("answer_dims").get<std::vector<std::size_t>>();
        s.shared_state = vector_from_json(j.at("state"));
        for (const auto& per_player : j.at("unitaries")) {
            std::vector<Matrix> px;
            for (const auto& u : per_player) px.push_back(matrix_from_json(u));
            s.unitaries.push_back(std::move(px));
        }
        return s;
    }
    throw InvariantError("strategy json: unknown type '" + type + "'");
}

}  // namespace repval
