#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "repval/errors.hpp"
#include "repval/rng.hpp"

namespace repval {

// Staged group search: stage s samples an iteration count uniformly from
// [0, stage_size(s)), runs that many amplification rounds on the group,
// measures, and classically verifies the measured index. Stage sizes are
// ceil(sqrt(m)), ceil(sqrt(m))-1, ..., floored at 1.
struct SearchConfig {
    double eps_prime = 0.1;
    double eta = 1e-3;
    std::size_t m = 10;          // group size, ceil(1/eps_prime)
    std::size_t q = 10;          // group count
    double c_prime = 3.0;        // h = c' log2(1/eta) / eps'
    std::size_t answer_bits = 1;
    std::size_t index_bits = 1;
    std::size_t stages = 4;

    std::size_t h() const { return q * m; }
    std::vector<std::size_t> stage_sizes() const;
    // Worst-case expected amplification rounds per group (every stage runs,
    // each contributing (stage_size - 1) / 2 on average); deterministic.
    double default_schedule_steps() const;

    // m from eps', q from the sample-count formula, bit widths from the game.
    static SearchConfig from_params(double eps_prime, double eta, double c_prime,
                                    std::size_t answer_bits, std::size_t index_bits);
};

struct SearchOutcome {
    double accept_prob = 0.0;
    double ci = 0.0;  // 3 standard errors of the Monte Carlo mean
    std::optional<std::size_t> found_index;
    std::size_t qubits_exchanged = 0;
    std::size_t samples = 0;
    bool exact = false;
};

std::string search_outcome_to_json(const SearchOutcome& o, const SearchConfig& cfg);

// Exact per-stage hit probability for `marked` marked items out of m after r
// amplification rounds, from the invariant-plane recursion.
double grover_success_probability(std::size_t m, std::size_t marked, std::size_t r);
// Same quantity from the full m-dimensional amplitude vector (cross-check).
double grover_success_probability_full(std::size_t m, std::size_t marked, std::size_t r);

// Probability the full staged schedule finds a marked index (exact average
// over the randomized iteration counts). Zero marked items yield exactly 0.
double grover_group_search_prob(const std::vector<bool>& marked,
                                std::size_t stages = SearchConfig{}.stages);

struct GroupRun {
    std::optional<std::size_t> found;  // verified marked index within the group
    std::size_t steps = 0;             // amplification rounds executed
};
// One sampled trace of the staged schedule.
GroupRun grover_group_search_run(const std::vector<bool>& marked, Rng& rng,
                                 std::size_t stages = SearchConfig{}.stages);

// Exact acceptance of the whole protocol: groups are h i.i.d. uniform draws
// from [n], so the per-group marked count is Binomial(m, losing fraction).
double protocol_accept_exact(std::size_t n, std::size_t losing, const SearchConfig& cfg);

// Monte Carlo over group composition; per-sample acceptance is computed
// exactly given the sampled marked counts. found_index reports a verified
// losing coordinate from a sampled trace when one exists.
SearchOutcome protocol_run(const std::vector<bool>& loss_indicator, const SearchConfig& cfg,
                           std::size_t samples, std::uint64_t seed);

// Round-trip qubit accounting: q groups, `steps` query rounds each, one
// answer+index payload per direction.
std::size_t comm_cost(const SearchConfig& cfg, double grover_steps_per_group);

}  // namespace repval
