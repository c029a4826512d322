#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace repval {

struct BatteryLine {
    std::string name;
    std::size_t cases = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // most positive lhs - rhs seen (<= 0 is clean)
};

std::string battery_to_json(const std::vector<BatteryLine>& lines, std::uint64_t seed);

// Randomized checks of the distance/entropy inequalities the toolkit relies
// on: Bures-metric properties, relative-(min-)entropy monotonicity and chain
// rules, the binary-distribution bounds, mixtures of pure-state families, and
// conditioning of product-input states. Relative tolerance 1e-7.
std::vector<BatteryLine> run_qit_battery(std::size_t cases, std::uint64_t seed);

// Strategy-rounding battery on random correlated pure states: per-input
// local unitaries from the polar construction, checked against the
// mutual-information bounds (single-block and per-player forms).
std::vector<BatteryLine> run_rounding_battery(std::size_t cases, std::uint64_t seed,
                                              std::size_t players);

}  // namespace repval
