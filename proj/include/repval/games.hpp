#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "repval/qmat.hpp"

namespace repval {

// Input distribution: product of per-player marginals (free game) or an
// explicit joint table, row-major with player 1 as the most significant digit.
struct ProductMu {
    std::vector<std::vector<double>> marginals;
};
struct ExplicitMu {
    std::vector<double> probs;
};
using Mu = std::variant<ProductMu, ExplicitMu>;

using Tuple = std::vector<std::size_t>;

// Mixed-radix helpers (first digit most significant).
std::size_t tuple_to_index(std::span<const std::size_t> tuple, std::span<const std::size_t> sizes);
Tuple index_to_tuple(std::size_t index, std::span<const std::size_t> sizes);
std::size_t space_size(std::span<const std::size_t> sizes);

// k-player one-round game with classical inputs/outputs.
class Game {
  public:
    using PredicateFn = std::function<bool(std::span<const std::size_t> x, std::span<const std::size_t> a)>;

    Game() = default;
    Game(std::vector<std::size_t> input_sizes, std::vector<std::size_t> output_sizes, Mu mu,
         PredicateFn predicate);
    // Dense predicate bitmap indexed x_index * |A| + a_index.
    static Game from_dense(std::vector<std::size_t> input_sizes, std::vector<std::size_t> output_sizes,
                           Mu mu, std::vector<bool> bits);

    std::size_t players() const { return input_sizes_.size(); }
    const std::vector<std::size_t>& input_sizes() const { return input_sizes_; }
    const std::vector<std::size_t>& output_sizes() const { return output_sizes_; }
    std::size_t input_space() const { return space_size(input_sizes_); }
    std::size_t output_space() const { return space_size(output_sizes_); }
    const Mu& mu() const { return mu_; }
    bool is_free() const { return std::holds_alternative<ProductMu>(mu_); }

    double mu_prob(std::span<const std::size_t> x) const;
    bool predicate(std::span<const std::size_t> x, std::span<const std::size_t> a) const {
        return predicate_(x, a);
    }

    // Dense bitmap view; materializes on demand (budget-checked).
    std::vector<bool> dense_predicate() const;

  private:
    std::vector<std::size_t> input_sizes_, output_sizes_;
    Mu mu_;
    PredicateFn predicate_;
};

void validate_mu(const Mu& mu, std::span<const std::size_t> input_sizes);

// Classical questions, quantum answers: referee measures {V_x, id - V_x}.
class CQGame {
  public:
    using VerifierFn = std::function<Matrix(std::span<const std::size_t> x)>;

    CQGame() = default;
    CQGame(std::vector<std::size_t> input_sizes, std::vector<std::size_t> answer_dims, Mu mu,
           VerifierFn verifier);

    std::size_t players() const { return input_sizes_.size(); }
    const std::vector<std::size_t>& input_sizes() const { return input_sizes_; }
    const std::vector<std::size_t>& answer_dims() const { return answer_dims_; }
    std::size_t answer_space() const { return space_size(answer_dims_); }
    const Mu& mu() const { return mu_; }
    bool is_free() const { return std::holds_alternative<ProductMu>(mu_); }
    double mu_prob(std::span<const std::size_t> x) const;

    // V_x, validated PSD with spectrum in [0, 1] up to slack.
    Matrix verifier(std::span<const std::size_t> x) const;

  private:
    std::vector<std::size_t> input_sizes_, answer_dims_;
    Mu mu_;
    VerifierFn verifier_;
};

struct ClassicalStrategy {
    // tables[j][x_j] = a_j
    std::vector<std::vector<std::size_t>> tables;
};

struct QuantumStrategy {
    std::vector<std::size_t> env_dims;  // dim of E_j per player
    Vector shared_state;                // on E_1 ox ... ox E_k
    // povms[j][x_j][a_j], each acting on E_j
    std::vector<std::vector<std::vector<Matrix>>> povms;
};
void validate_quantum_strategy(const QuantumStrategy& s);

struct CQStrategy {
    std::vector<std::size_t> env_dims;     // E_j
    std::vector<std::size_t> answer_dims;  // A_j
    Vector shared_state;                   // on (E_1 A_1) ox ... ox (E_k A_k)
    std::vector<std::vector<Matrix>> unitaries;  // [j][x_j] on E_j ox A_j
};
void validate_cq_strategy(const CQStrategy& s);

struct NSBehavior {
    std::vector<std::size_t> input_sizes, output_sizes;
    std::vector<double> table;  // p(a|x), index x_index * |A| + a_index
    double prob(std::size_t x_index, std::size_t a_index) const;
};
// Throws InvariantError when normalization (1e-9) or per-player
// non-signaling (1e-7) fails.
void validate_ns_behavior(const NSBehavior& b);

// --- repetition ---

// Lazy n-fold repetition: player alphabets exponentiate; composite symbols
// encode per-coordinate symbols with coordinate 1 most significant.
Game repeat(const Game& g, std::size_t n);
CQGame repeat_cq(const CQGame& g, std::size_t n);

// Independent per-coordinate play of a single-game strategy.
QuantumStrategy repeat_strategy(const QuantumStrategy& s, std::size_t n);
// Play every coordinate on the same shared state, measuring sequentially;
// keeps env dims fixed instead of exponentiating them.
QuantumStrategy sequential_repeat_strategy(const QuantumStrategy& s, std::size_t n);
CQStrategy repeat_cq_strategy(const CQStrategy& s, std::size_t n);

// --- uniformization ---

struct Uniformized {
    Game game;                                       // uniform product mu
    std::vector<std::vector<std::size_t>> encodings; // f_j: new symbol -> old symbol
    std::vector<double> tv_distances;                // per player
};
Uniformized uniformize(const Game& g, double gamma);

// Pull a strategy for the uniformized game back... the forward direction:
// compose a strategy for g into one for the uniformized game via f_j.
ClassicalStrategy pull_back(const Uniformized& u, const ClassicalStrategy& s);

// --- the k-player agreement game ---

// Inputs: one uniform bit per player. Outputs: pairs (pointer, bit) encoded
// pointer * 2 + bit. Win iff all pointers name the same player i and the
// parity of the other players' bits equals x_i.
Game build_agreement_game(std::size_t k);
// Strategy for the k-fold repetition: at coordinate l player j answers
// (l, own input bit at coordinate j).
ClassicalStrategy agreement_repeated_strategy(std::size_t k);

// --- JSON serialization ---

std::string game_to_json(const Game& g);
Game game_from_json(const std::string& text);
std::string cq_game_to_json(const CQGame& g);
CQGame cq_game_from_json(const std::string& text);
std::string strategy_to_json(const ClassicalStrategy& s);
std::string strategy_to_json(const QuantumStrategy& s);
std::string strategy_to_json(const CQStrategy& s);
// Dispatches on the "type" field.
std::variant<ClassicalStrategy, QuantumStrategy, CQStrategy> strategy_from_json(
    const std::string& text);

}  // namespace repval
