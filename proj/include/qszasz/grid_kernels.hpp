#pragma once

// Per-grid-point kernels. Every point is independent, so the parallel
// variants split the index range across OpenMP threads; the serial variants
// are the reference the tests compare against. Results are written by index,
// which keeps every downstream reduction in a fixed order.

#include <exception>
#include <span>
#include <string>
#include <vector>

#include "qszasz/operator.hpp"
#include "qszasz/quadrature.hpp"

namespace qszasz {

enum class Execution { serial, parallel };

struct GridValues {
  std::vector<double> values;
  std::vector<std::string> failures;  // empty string where the point succeeded
  bool numerical_failure = false;     // some point hit SeriesExhausted/PrecisionExhausted

  bool ok() const;
  /// First non-empty failure message, or "".
  std::string first_failure() const;
};

/// M_{n,q}(f;x) - f(x) at every x.
GridValues deviation_on_grid(const RealFunction& f, std::span<const double> xs,
                             const QContext& ctx, const SeriesPolicy& policy, Execution exec);

/// S_n(f;x) - f(x) for the classical operator.
GridValues classical_deviation_on_grid(const RealFunction& f, std::span<const double> xs, int n,
                                       const SeriesPolicy& policy, Execution exec);

struct SteklovValue {
  double fh;   // modified Steklov mean
  double fh2;  // its second derivative, h^-2 (8 D2_{h/2} f - D2_h f)
};

/// Tensor Gauss-Legendre evaluation of the modified Steklov mean at one point.
SteklovValue steklov_point(const RealFunction& f, double h, double x, const GaussRule& rule);

struct SteklovGrid {
  std::vector<double> fh;
  std::vector<double> fh2;
};

SteklovGrid steklov_on_grid(const RealFunction& f, double h, std::span<const double> xs,
                            const GaussRule& rule, Execution exec);

}  // namespace qszasz
