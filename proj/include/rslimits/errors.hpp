#pragma once

#include <stdexcept>
#include <string>

namespace rslimits {

/// Invalid argument: out-of-range parameter, mismatched dimensions, malformed prior.
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string &what) : std::invalid_argument(what) {}
};

/// A configured size cap (support size, enumeration size, allocation) was exceeded.
class SizeError : public std::length_error {
public:
  explicit SizeError(const std::string &what) : std::length_error(what) {}
};

/// A numerical procedure failed to produce a usable answer.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

/// Root bracket on which the target indicator does not change sign.
class BracketError : public NumericalError {
public:
  BracketError(const std::string &what, double lo_value, double hi_value)
      : NumericalError(what), lo_value_(lo_value), hi_value_(hi_value) {}

  double lo_value() const noexcept { return lo_value_; }
  double hi_value() const noexcept { return hi_value_; }

private:
  double lo_value_;
  double hi_value_;
};

} // namespace rslimits
