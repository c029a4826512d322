#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "repval/games.hpp"

namespace repval {

struct ValueDiagnostics {
    std::size_t iterations = 0;
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
    std::string lp_status;
};

struct ValueResult {
    double value = 0.0;
    std::optional<std::variant<ClassicalStrategy, NSBehavior, QuantumStrategy>> witness;
    std::string method;
    ValueDiagnostics diagnostics;
};

std::string value_result_to_json(const ValueResult& r);

// Exact optimum over deterministic strategies; the search space
// prod_j |A_j|^|X_j| must stay within budget.
ValueResult classical_value_bruteforce(const Game& g, std::size_t budget = 50'000'000);

double evaluate_classical(const Game& g, const ClassicalStrategy& s);
double evaluate_ns(const Game& g, const NSBehavior& b);
double evaluate_quantum_strategy(const Game& g, const QuantumStrategy& s);
double evaluate_cq_strategy(const CQGame& g, const CQStrategy& s);

// Probability that the answers in coordinates C pass, under the n-fold game.
double cq_win_subset_probability(const CQGame& g, std::size_t n, const CQStrategy& s,
                                 std::span<const std::size_t> c);

// LP over non-signaling behaviors; exact within 1e-6 at these sizes.
ValueResult ns_value_lp(const Game& g, std::size_t budget = 5'000'000);

// Alternating lower-bound heuristic for the entangled value. Binary outputs
// only: best response per player is the projector onto the positive eigenspace
// of its response operator; the state moves to the game operator's top
// eigenvector.
ValueResult seesaw_lower_bound(const Game& g, std::span<const std::size_t> env_dims,
                               std::size_t restarts, std::uint64_t seed,
                               std::size_t max_sweeps = 300);

// Embed a deterministic strategy as a quantum strategy on given env dims
// (basis projectors, product state |0..0>).
QuantumStrategy embed_classical(const Game& g, const ClassicalStrategy& s);

// Dilate a measurement-based strategy into a CQ strategy (answers written
// into fresh registers by unitaries).
CQStrategy cq_from_quantum(const Game& g, const QuantumStrategy& s);
// Diagonal verifiers from a classical predicate.
CQGame cq_from_game(const Game& g);

}  // namespace repval
