#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brownne {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad index, dimension mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The user-supplied function returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A query point fell outside the region where the data is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sampled data is too coarse for the requested operation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary input; `offset()` is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Configuration validation failure. Carries every offending key, not just the first.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : Error(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

}  // namespace brownne
