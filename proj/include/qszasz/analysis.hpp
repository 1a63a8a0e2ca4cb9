#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qszasz/grid_kernels.hpp"
#include "qszasz/operator.hpp"
#include "qszasz/qcore.hpp"
#include "qszasz/real_function.hpp"

namespace qszasz {

/// A function on [0, inf) together with the weight order p of its space C_p.
/// f2..f4 are optional analytic derivatives.
struct WeightedFunction {
  RealFunction f;
  int p = 0;
  std::function<double(double)> f2;
  std::function<double(double)> f3;
  std::function<double(double)> f4;

  /// Checks p >= 0 and spot-checks f2 against central differences at three
  /// points (tolerance 1e-4). Throws std::invalid_argument on mismatch.
  void validate() const;
};

/// w_p(x) = 1/(1 + x^p), w_0 = 1.
double weight_function(int p, double x);

/// Uniform grid on [0, x_max]. Suprema are taken as grid maxima.
struct GridSpec {
  double x_max = 10.0;
  int count = 2001;

  void validate() const;
  std::vector<double> points() const;
  double spacing() const { return x_max / (count - 1); }
};

struct ReportRow {
  int n = 0;
  double q = 1.0;
  std::string metric;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double aux = std::numeric_limits<double>::quiet_NaN();  // e.g. [n] or the diagnostic limit
  double x = std::numeric_limits<double>::quiet_NaN();    // argmax or evaluation point
  std::string failure;  // non-empty when the row could not be evaluated
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::optional<double> fitted_slope;
  std::optional<double> fitted_intercept;
  std::optional<double> fitted_constant;
  bool bound_violated = false;
  bool numerical_failure = false;
};

struct LineFit {
  double slope;
  double intercept;
};

/// Ordinary least squares; needs at least two points with distinct abscissae.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

/// sup over the grid of w_p(x) |f(x)|. Throws NonFiniteValue naming x.
double weighted_norm(const WeightedFunction& wf, const GridSpec& grid);

/// omega_p^2(f; delta): sup of w_p(x) |f(x+2h) - 2 f(x+h) + f(x)| over grid x
/// and a 32-point geometric subgrid of h in (0, delta].
double second_modulus(const WeightedFunction& wf, double delta, const GridSpec& grid);

/// omega(f; delta): sup |f(x) - f(y)| over grid pairs with |x - y| <= delta,
/// plus the pairs (x, x + delta) that stay inside the grid.
double first_modulus(const std::function<double(double)>& f, double delta, const GridSpec& grid);

SteklovValue steklov(const WeightedFunction& wf, double h, double x, int quad_points = 64);

/// Weighted norms around the Steklov mean for one h on the grid.
struct SteklovCheck {
  double h;
  double error_norm;    // ||f - f_h||_p
  double omega2;        // omega_p^2(f; h)
  double fh2_norm;      // ||f_h''||_p
  double fh2_ratio;     // ||f_h''||_p h^2 / omega_p^2(f; h)
  bool error_bound_holds;  // error_norm <= omega2 (1 + 1e-6)
};

SteklovCheck steklov_check(const WeightedFunction& wf, double h, const GridSpec& grid,
                           int quad_points = 64, Execution exec = Execution::parallel);

struct NRange {
  int min = 1;
  int max = 12;
};

/// Per n: sup over the grid of w_p(x) |M(f;x) - f(x)|. Fits ln(error) against
/// n for the q operator and against ln n for the classical baseline.
ExperimentReport convergence_experiment(const WeightedFunction& wf, double q, NRange n_range,
                                        const GridSpec& grid, const SeriesPolicy& policy = {},
                                        bool classical_baseline = false,
                                        Execution exec = Execution::parallel);

/// Per n: V_n = [n] (M(f;x) - f(x)) against the limit x f''(x)/2
/// (rhs) and, when f3 and f4 are present, the predictor
/// x f''/2 + (q-1) x^2 f'''/6 + (q-1)^2 x^3 f''''/24 (aux). Observational.
ExperimentReport voronovskaja_scan(const WeightedFunction& wf, double q, double x, NRange n_range,
                                   const SeriesPolicy& policy = {});

enum class BoundMode { local, global, sqrtmod };

/// local: w_p|M(g)-g| against ||g''||_p x/[n], constant fitted as the max ratio.
/// global: w_p|M(f)-f| against omega_p^2(f; sqrt(x/[n])), constant fitted likewise.
/// sqrtmod: sup |M(f)-f| against 2 omega(f*; 1/sqrt([n])) with f*(z) = f(z^2);
/// sets bound_violated when some lhs exceeds rhs.
ExperimentReport bound_check(BoundMode mode, const WeightedFunction& wf, double q, NRange n_range,
                             const GridSpec& grid, const SeriesPolicy& policy = {},
                             Execution exec = Execution::parallel);

}  // namespace qszasz
