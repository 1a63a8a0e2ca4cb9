#pragma once

#include <stdexcept>
#include <string>

namespace qszasz {

/// A series or product ran out of its term budget before converging.
class SeriesExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The weights need more working precision than the largest supported tier.
class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user function returned NaN or infinity where a finite value is required.
class NonFiniteValue : public std::runtime_error {
 public:
  NonFiniteValue(const std::string& what, double where)
      : std::runtime_error(what), where_(where) {}

  double where() const noexcept { return where_; }

 private:
  double where_;
};

}  // namespace qszasz
