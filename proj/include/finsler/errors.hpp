#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expression text that could not be parsed; offset is the byte position
// of the offending token.
struct SyntaxError : Error {
    std::size_t offset;
    SyntaxError(const std::string& what, std::size_t off)
        : Error(what + " (offset " + std::to_string(off) + ")"), offset(off) {}
};

// Evaluation left the domain of an elementary function (log of a
// non-positive number, division by zero, ...).
struct DomainError : Error {
    using Error::Error;
};

// A Finsler structure failed a validity requirement (loss of positive
// definiteness, Randers one-form too large, point outside the chart box).
struct ModelError : Error {
    using Error::Error;
};

// Bad run configuration; messages carry the JSON field path.
struct ConfigError : Error {
    using Error::Error;
};

// Internal numerical failure (non-positive volume density, singular
// matrix where a definite one was guaranteed).
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace finsler
