#pragma once

#include <stdexcept>
#include <string>

namespace cfp {

// Root of every error raised by the library. Subclasses map onto CLI exit
// codes: DataError -> 1, ConfigError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A primitive produced NaN/Inf, or a loss became non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input files. Messages carry file and line where known.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class EncodingError : public DataError {
 public:
  EncodingError(const std::string& what, std::size_t position)
      : DataError(what), position_(position) {}
  // 1-based residue position of the offending character, 0 when not applicable.
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class TruncationError : public EncodingError {
 public:
  using EncodingError::EncodingError;
};

// The finite-difference oracle detected a non-deterministic objective.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfp
