#pragma once

#include <stdexcept>
#include <string>

namespace mdtlab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed task graph, spec, or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was called in a state that does not allow it
// (stepping a terminal state, mutating a frozen model, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A file or record failed schema validation. `row` is 1-based, 0 when the
// failure is not tied to a row.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Numerical failure (rank-deficient design, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdtlab
