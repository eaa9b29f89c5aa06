#ifndef TATN_COMMON_HPP
#define TATN_COMMON_HPP

#include <stdexcept>
#include <string>

namespace tatn {

// Error taxonomy. The CLI maps DataError/ConfigError to exit code 2,
// usage problems to exit code 1.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes do not conform to the requested operation.
struct DimensionError : Error {
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// A forward op produced NaN/Inf, or a numeric contract was violated.
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// An API precondition was violated by the caller.
struct ContractError : Error {
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Malformed or unreadable input data (corpora, tables, checkpoints).
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Inconsistent configuration (unknown keys, mismatched vocabularies, ...).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace tatn

#endif
