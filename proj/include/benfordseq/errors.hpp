#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benfordseq {

// Library-level failure taxonomy. The CLI maps these onto exit codes:
// UsageError/ParseError -> 2, everything else here -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed expression or input file. `offset` is the byte position of the
// first offending character in the source text.
struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : Error(msg + " (byte " + std::to_string(off) + ")"), offset(off) {}
};

// Evaluation outside a function's domain: log of a non-positive value,
// fractional power of a negative base, division by zero.
struct DomainError : Error {
  using Error::Error;
};

// A result left the representable range (decimal exponent past int64,
// log-domain magnitude past 2^53).
struct OverflowError : Error {
  using Error::Error;
};

// A construction could not be completed: no admissible auxiliary constant,
// ill-conditioned coefficient solve, unsupported depth.
struct ConstructionError : Error {
  using Error::Error;
};

// Caller misuse that the CLI reports as a usage problem.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace benfordseq
