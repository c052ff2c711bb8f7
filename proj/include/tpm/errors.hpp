#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpm {

/// Input failed a structural check (shape, Hermiticity, normalization, ...).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Layout / dimension mismatch between an operator and its tensor layout.
struct DimensionError : ValidationError {
    using ValidationError::ValidationError;
};

/// Malformed input file. `row` is 1-based and counts the header line.
struct ParseError : ValidationError {
    ParseError(const std::string &what, std::size_t row)
        : ValidationError("line " + std::to_string(row) + ": " + what), row(row) {}
    std::size_t row;
};

/// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Request too large to enumerate at desk scale.
struct ResourceError : std::length_error {
    using std::length_error::length_error;
};

/// File system failure; the message names the path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tpm
