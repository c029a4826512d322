#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "repval/games.hpp"
#include "repval/qit.hpp"

namespace repval {

// Register naming for the joint input/copy/entanglement/answer state:
// coordinate i (1-based row), player j (1-based column).
std::string x_label(std::size_t i, std::size_t j);
std::string xp_label(std::size_t i, std::size_t j);
std::string e_label(std::size_t j);
std::string a_label(std::size_t i, std::size_t j);
std::string r_label(std::size_t i);
// X(.,j) + X'(.,j) + E(j) + A(.,j): everything player j holds.
std::vector<std::string> player_labels(std::size_t n, std::size_t k, std::size_t j);

inline constexpr std::size_t kAdviceDimCap = 16384;

struct AdviceState {
    LabeledState state;  // pure, normalized
    std::size_t n = 1;
    std::size_t k = 1;
    std::vector<std::size_t> input_sizes;   // single-game, per player
    std::vector<std::size_t> answer_sizes;  // |A_j| (classical) or dim(A_j) (cq)
    bool cq = false;
    std::optional<Game> game;
    std::optional<CQGame> cq_game;
    std::vector<std::size_t> conditioned_coords;  // 0-based
    double lambda = 1.0;
    bool is_conditioned = false;
    std::string conditioning = "none";
};

struct ReductionReport {
    double lambda = 1.0;
    std::vector<double> coord_divergences;                 // (B) per coordinate
    std::vector<std::vector<double>> mutual_informations;  // (C) [coordinate][player]
    std::vector<double> coord_win_probs;                   // (A) per coordinate
    double delta = 0.0;                                    // max of (B) and (C) entries
    // filled by round_and_play
    std::optional<std::size_t> coordinate;
    double rounding_k = 0.0;  // E_x K(phi_x, U_x phi U_x^dagger)
    double k_f0_f1 = 0.0;
    double pr_f0 = 0.0;
    double pr_f1 = 0.0;
    double kappa = 0.0;
};

std::string reduction_report_to_json(const ReductionReport& r);

// The coherent pre-measurement state of a repeated-game strategy: inputs in
// superposition with a copy register, answers written by the sqrt-POVM Kraus
// operators. The strategy must be for the n-fold repetition of g.
AdviceState build_psi0(const Game& g, std::size_t n, const QuantumStrategy& s);

// Project the answers onto win-in-every-coordinate and renormalize.
AdviceState condition_win_all(const AdviceState& adv);

// CQ variant: referee measurement applied coherently on the coordinates in
// `c`, flag registers recording outcomes, conditioned on all-accept.
AdviceState condition_win_subset_cq(const CQGame& g, std::size_t n, const CQStrategy& s,
                                    std::span<const std::size_t> c);

// Properties of the (possibly conditioned) state, one entry per coordinate.
ReductionReport measure_properties(const AdviceState& adv);

// Local-unitary strategy rounding at one coordinate, playing the single game
// through the rounded state; fills the rounding fields of the report.
ReductionReport round_and_play(const AdviceState& adv, std::size_t coordinate);

struct ProtocolCResult {
    double omega = 0.0;        // E_{i not in C} Pr(win i | win C)
    double kappa = 0.0;        // winning probability of the sampled-advice protocol
    double delta_bound = 0.0;  // measured mean per-coordinate divergence
    double lambda = 0.0;       // Pr(win C)
    bool exact = true;
    std::size_t samples = 0;
};

std::string protocol_c_result_to_json(const ProtocolCResult& r);

// Classical analogue on a deterministic strategy for the n-fold game: shared
// randomness samples the conditioned transcript, each player resamples their
// own inputs consistently and answers from the strategy table.
ProtocolCResult protocol_c_classical(const Game& g, std::size_t n, const ClassicalStrategy& s,
                                     std::span<const std::size_t> c, bool exact,
                                     std::uint64_t seed = 0, std::size_t samples = 0);

}  // namespace repval
