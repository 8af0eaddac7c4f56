#pragma once
#include <stdexcept>
#include <string>

namespace gadnr {

// Error taxonomy maps onto the CLI exit codes: config 2, data 3, numeric 4.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input files, malformed lines, out-of-range indices, missing labels.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, shape mismatches, Cholesky failures.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gadnr
