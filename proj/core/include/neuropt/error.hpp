#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace neuropt {

/// Base class of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible with the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numeric kernel left its domain (log of a nonpositive value, division by
/// zero, ...). Carries the index of the offending node or instruction.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::int64_t location)
      : Error(what), location_(location) {}

  std::int64_t location() const noexcept { return location_; }

 private:
  std::int64_t location_;
};

/// Invalid argument or violated precondition on user-supplied data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (JSON documents, tape IR).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace neuropt
