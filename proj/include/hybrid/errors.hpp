#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hybrid {

// Bad input data or arguments: malformed files, violated invariants.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : ValidationError {
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : ValidationError(source + ":" + std::to_string(line) + ": " + what), line(line) {}

    std::size_t line;
};

// Inconsistent model configuration, e.g. a pricing variant fed parameters it cannot use.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Arguments outside the domain of a formula (no-arbitrage bounds, negative variance).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Numerical breakdown: non-convergence, degenerate denominators, non-finite values.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hybrid
