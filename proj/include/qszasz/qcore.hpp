#pragma once

#include <cstdint>
#include <functional>
#include <limits>

namespace qszasz {

/// Operator parameters: base q > 1 and operator index n >= 1.
///
/// q = 1 is rejected outright. The classical Szasz-Mirakjan operator is a
/// separate implementation (see classical_szasz), selected by the
/// `classical_baseline` flag where an experiment needs the comparison.
class QContext {
 public:
  static constexpr double min_q_gap = 1e-12;

  QContext(double q, int n, bool classical_baseline = false);

  double q() const noexcept { return q_; }
  int n() const noexcept { return n_; }
  bool classical_baseline() const noexcept { return classical_baseline_; }

  /// Same q, different operator index.
  QContext with_n(int n) const { return QContext(q_, n, classical_baseline_); }

 private:
  double q_;
  int n_;
  bool classical_baseline_;
};

/// A real number stored as sign and natural log of its magnitude.
///
/// Values built from a representable double keep that double so that the
/// round trip is exact; products of two such values keep the rounded product
/// while it stays in the normal range.
class SignedLogValue {
 public:
  static constexpr double log_zero = -std::numeric_limits<double>::infinity();

  SignedLogValue() = default;  // zero

  static SignedLogValue from_real(double v);
  static SignedLogValue from_log(int sign, double log_abs);
  static SignedLogValue one() { return from_real(1.0); }

  int sign() const noexcept { return sign_; }
  double log_abs() const noexcept { return log_abs_; }
  bool is_zero() const noexcept { return sign_ == 0; }

  /// Plain value; +-infinity when the magnitude exceeds the double range.
  double to_real() const;

  SignedLogValue operator*(const SignedLogValue& rhs) const;
  SignedLogValue operator/(const SignedLogValue& rhs) const;
  SignedLogValue operator-() const;

 private:
  int sign_ = 0;
  double log_abs_ = log_zero;
  double exact_ = 0.0;
  bool has_exact_ = true;
};

/// Convergence controls shared by every series and product in the library.
struct SeriesPolicy {
  double rel_tol = 1e-14;
  int max_terms = 5000;
  int post_peak_window = 3;

  /// Throws std::invalid_argument unless rel_tol > 0 and max_terms >= 16.
  void validate() const;
};

/// [m]_q = (q^m - 1)/(q - 1). Returns +infinity when the result overflows.
double q_integer(std::int64_t m, const QContext& ctx);

/// ln [m]_q, finite for every m >= 1 (and -infinity for m = 0).
double log_q_integer(std::int64_t m, const QContext& ctx);

/// [m]_q! as a signed-log value.
SignedLogValue q_factorial(std::int64_t m, const QContext& ctx);

/// Gaussian binomial [m choose k]_q. Throws std::invalid_argument if k > m.
SignedLogValue q_binomial(std::int64_t m, std::int64_t k, const QContext& ctx);

/// Jackson q-derivative (f(qx) - f(x)) / ((q - 1) x).
///
/// At x = 0 the limit is estimated from the quotient at h = 1e-6 and h/2
/// with one Richardson step. Non-finite values of f are passed through.
double q_derivative(const std::function<double(double)>& f, double x, const QContext& ctx);

/// Jackson's entire q-exponential e_q(z) = sum z^k / [k]_q!.
///
/// z >= 0 sums the positive series in log space. z < 0 multiplies the
/// product form prod_j (1 + (q-1) z / q^{j+1}), counting negative factors for
/// the sign and folding the tail into a closed-form log series. Throws
/// SeriesExhausted when policy.max_terms is reached.
SignedLogValue e_q(double z, const QContext& ctx, const SeriesPolicy& policy = {});

/// The inverted-base exponential E_q(z) = sum q^{k(k-1)/2} z^k / [k]_q!.
/// Throws std::domain_error unless |z| < 1/(q-1).
double big_e_q(double z, const QContext& ctx, const SeriesPolicy& policy = {});

/// Real zeros of e_q: z_j = -q^{j+1}/(q-1), j >= 0.
double e_q_zero(int j, const QContext& ctx);

}  // namespace qszasz
