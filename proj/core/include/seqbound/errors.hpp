#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqbound {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument lies outside the domain of a piecewise function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested value lies outside the range of a piecewise function.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A structural invariant (monotonicity, concavity, ...) does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Sequences that should describe the same relation disagree on its mass.
class CatalogInconsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  QueryError(const std::string& message, size_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"), _offset(offset) {}
  explicit QueryError(const std::string& message) : Error(message) {}

  size_t offset() const {
    return _offset;
  }

 private:
  size_t _offset{0};
};

// Valid SQL that falls outside the supported subset (negation, cross-relation OR, cross products).
class UnsupportedQueryError : public QueryError {
 public:
  using QueryError::QueryError;
};

class OracleTooLargeError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqbound
