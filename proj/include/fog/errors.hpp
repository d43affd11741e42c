#pragma once

#include <stdexcept>
#include <string>

namespace fog {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based, 0 when unknown.
struct ParseError : Error {
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
    int line;
};

// Well-formed input that violates a structural requirement (arity, ranges, ...).
struct ValidationError : Error {
    using Error::Error;
};

// A query needed an eq-level at or above the oracle cutoff.
struct CutoffError : Error {
    using Error::Error;
};

// A precondition of an operation does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

// Something the theory guarantees did not happen; indicates a bug.
struct InvariantError : Error {
    using Error::Error;
};

}  // namespace fog
