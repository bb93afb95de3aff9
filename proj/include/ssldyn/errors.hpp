#pragma once

#include <stdexcept>
#include <string>

namespace ssldyn {

// Bad arguments, malformed matrices, shape mismatches.
struct InvalidInputError : std::runtime_error {
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing configuration (CLI / experiment configs).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed files on disk. Carries a 1-based line number when known.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_number(line) {}
    long line_number;
};

// Numerical failures: blow-up, non-convergence, not-PSD, rank deficiency.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ssldyn
