#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace sgwn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input shape, value, or structure.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds a configured limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Invalid combination of configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-convergence or non-finite intermediate. Carries the last iterate when
/// the failing routine is iterative.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          double last_iterate = std::numeric_limits<double>::quiet_NaN())
      : Error(what), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

/// Malformed or truncated binary file. `offset` is the byte position where
/// decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// An input file or directory that a command needs does not exist.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgwn
