#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace repval {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape problems: label collisions, unknown labels, dimension mismatches.
struct DimensionError : Error {
    using Error::Error;
};

// A declared invariant of an input object fails (non-Hermitian spectral input,
// POVM not summing to identity, predicate table malformed, ...).
struct InvariantError : Error {
    using Error::Error;
};

// A matrix function hit the kernel of its argument (log of a rank-deficient
// state and friends). Conditioning pipelines catch this to report +inf.
struct SupportViolation : Error {
    using Error::Error;
};

// Conditioning on an event of probability zero leaves the state undefined.
struct ZeroProbabilityEvent : Error {
    using Error::Error;
};

// A dense allocation or enumeration would exceed the configured budget.
struct BudgetError : Error {
    using Error::Error;
};

// Dense-allocation cap in bytes, configurable via REPVAL_BUDGET_MB.
inline std::size_t budget_bytes() {
    static const std::size_t cached = [] {
        std::size_t mb = 2048;
        if (const char* env = std::getenv("REPVAL_BUDGET_MB")) {
            const long v = std::atol(env);
            if (v > 0) mb = static_cast<std::size_t>(v);
        }
        return mb * std::size_t(1024) * std::size_t(1024);
    }();
    return cached;
}

inline void check_alloc(std::size_t bytes, const char* what) {
    if (bytes > budget_bytes()) {
        throw BudgetError(std::string(what) + ": needs " + std::to_string(bytes / (1024 * 1024) + 1) +
                          " MB, budget is " + std::to_string(budget_bytes() / (1024 * 1024)) +
                          " MB (REPVAL_BUDGET_MB)");
    }
}

}  // namespace repval
