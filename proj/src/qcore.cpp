#include "qszasz/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qszasz/errors.hpp"

namespace qszasz {

namespace {

// Product factors with |a| below this go into the closed-form log tail.
constexpr double kProductTailSwitch = 0.25;

bool is_normal_finite(double v) { return std::isfinite(v) && (v == 0.0 || std::isnormal(v)); }

double log_add(double a, double b) {
  if (a == SignedLogValue::log_zero) return b;
  if (b == SignedLogValue::log_zero) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

QContext::QContext(double q, int n, bool classical_baseline)
    : q_(q), n_(n), classical_baseline_(classical_baseline) {
  if (!(q >= 1.0 + min_q_gap) || !std::isfinite(q)) {
    throw std::invalid_argument("q must exceed 1 (got " + std::to_string(q) + ")");
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1 (got " + std::to_string(n) + ")");
}

// ---------------------------------------------------------------------------
// SignedLogValue

SignedLogValue SignedLogValue::from_real(double v) {
  SignedLogValue r;
  if (v == 0.0) return r;
  r.sign_ = v > 0 ? 1 : -1;
  r.log_abs_ = std::log(std::fabs(v));
  r.exact_ = v;
  r.has_exact_ = std::isfinite(v);
  return r;
}

SignedLogValue SignedLogValue::from_log(int sign, double log_abs) {
  SignedLogValue r;
  if (sign == 0 || log_abs == log_zero) return r;
  r.sign_ = sign > 0 ? 1 : -1;
  r.log_abs_ = log_abs;
  r.has_exact_ = false;
  return r;
}

double SignedLogValue::to_real() const {
  if (sign_ == 0) return 0.0;
  if (has_exact_) return exact_;
  return sign_ * std::exp(log_abs_);
}

SignedLogValue SignedLogValue::operator*(const SignedLogValue& rhs) const {
  if (sign_ == 0 || rhs.sign_ == 0) return {};
  SignedLogValue r;
  r.sign_ = sign_ * rhs.sign_;
  r.log_abs_ = log_abs_ + rhs.log_abs_;
  r.has_exact_ = false;
  if (has_exact_ && rhs.has_exact_) {
    const double p = exact_ * rhs.exact_;
    if (p != 0.0 && is_normal_finite(p)) {
      r.exact_ = p;
      r.has_exact_ = true;
    }
  }
  return r;
}

SignedLogValue SignedLogValue::operator/(const SignedLogValue& rhs) const {
  if (rhs.sign_ == 0) throw std::domain_error("SignedLogValue: division by zero");
  if (sign_ == 0) return {};
  SignedLogValue r;
  r.sign_ = sign_ * rhs.sign_;
  r.log_abs_ = log_abs_ - rhs.log_abs_;
  r.has_exact_ = false;
  if (has_exact_ && rhs.has_exact_) {
    const double p = exact_ / rhs.exact_;
    if (p != 0.0 && is_normal_finite(p)) {
      r.exact_ = p;
      r.has_exact_ = true;
    }
  }
  return r;
}

SignedLogValue SignedLogValue::operator-() const {
  SignedLogValue r = *this;
  r.sign_ = -sign_;
  r.exact_ = -exact_;
  return r;
}

void SeriesPolicy::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (max_terms < 16) throw std::invalid_argument("max_terms must be >= 16");
  if (post_peak_window < 1) throw std::invalid_argument("post_peak_window must be >= 1");
}

// ---------------------------------------------------------------------------
// q-integers and friends

double q_integer(std::int64_t m, const QContext& ctx) {
  if (m < 0) throw std::invalid_argument("q_integer: m must be >= 0");
  if (m == 0) return 0.0;
  const double d = ctx.q() - 1.0;
  const double md = static_cast<double>(m);
  if (d < 0.25) {
    // q^m - 1 cancels badly near q = 1.
    return std::expm1(md * std::log1p(d)) / d;
  }
  return (std::pow(ctx.q(), md) - 1.0) / d;
}

double log_q_integer(std::int64_t m, const QContext& ctx) {
  if (m < 0) throw std::invalid_argument("log_q_integer: m must be >= 0");
  if (m == 0) return SignedLogValue::log_zero;
  const double md = static_cast<double>(m);
  const double lq = std::log1p(ctx.q() - 1.0);
  if (md * lq < 700.0) return std::log(q_integer(m, ctx));
  return md * lq + std::log1p(-std::exp(-md * lq)) - std::log(ctx.q() - 1.0);
}

SignedLogValue q_factorial(std::int64_t m, const QContext& ctx) {
  if (m < 0) throw std::invalid_argument("q_factorial: m must be >= 0");
  double product = 1.0;
  std::int64_t j = 1;
  for (; j <= m; ++j) {
    const double next = product * q_integer(j, ctx);
    if (!std::isfinite(next) || next > 1e300) break;
    product = next;
  }
  if (j > m) return SignedLogValue::from_real(product);
  double log_sum = std::log(product);
  for (; j <= m; ++j) log_sum += log_q_integer(j, ctx);
  return SignedLogValue::from_log(1, log_sum);
}

SignedLogValue q_binomial(std::int64_t m, std::int64_t k, const QContext& ctx) {
  if (k < 0 || m < 0) throw std::invalid_argument("q_binomial: arguments must be >= 0");
  if (k > m) {
    throw std::invalid_argument("q_binomial: k = " + std::to_string(k) + " exceeds m = " +
                                std::to_string(m));
  }
  const std::int64_t kk = std::min(k, m - k);
  double value = 1.0;
  bool plain = true;
  double log_value = 0.0;
  for (std::int64_t i = 1; i <= kk; ++i) {
    const double num = q_integer(m - kk + i, ctx);
    const double den = q_integer(i, ctx);
    if (plain) {
      const double next = value * num / den;
      if (std::isfinite(next) && next < 1e300 && std::isfinite(num)) {
        value = next;
        continue;
      }
      plain = false;
      log_value = std::log(value);
    }
    log_value += log_q_integer(m - kk + i, ctx) - log_q_integer(i, ctx);
  }
  return plain ? SignedLogValue::from_real(value) : SignedLogValue::from_log(1, log_value);
}

double q_derivative(const std::function<double(double)>& f, double x, const QContext& ctx) {
  const double q = ctx.q();
  auto quotient = [&](double at) { return (f(q * at) - f(at)) / ((q - 1.0) * at); };
  if (x != 0.0) return quotient(x);
  constexpr double h = 1e-6;
  const double coarse = quotient(h);
  const double fine = quotient(h / 2);
  return 2.0 * fine - coarse;
}

// ---------------------------------------------------------------------------
// q-exponentials

namespace {

SignedLogValue e_q_positive(double z, const QContext& ctx, const SeriesPolicy& policy) {
  const double log_z = std::log(z);
  const double log_tol = std::log(policy.rel_tol);
  double log_term = 0.0;  // k = 0
  double log_sum = 0.0;
  for (int k = 0; k < policy.max_terms; ++k) {
    const double log_next = log_term + log_z - log_q_integer(k + 1, ctx);
    const double log_ratio = log_next - log_term;
    if (log_ratio < 0.0) {
      // Past the peak the ratios keep shrinking: tail <= next / (1 - ratio).
      const double log_tail = log_next - std::log1p(-std::exp(log_ratio));
      if (log_tail < log_sum + log_tol) return SignedLogValue::from_log(1, log_sum);
    }
    log_term = log_next;
    log_sum = log_add(log_sum, log_term);
  }
  throw SeriesExhausted("e_q: series for z = " + std::to_string(z) + " did not converge within " +
                        std::to_string(policy.max_terms) + " terms");
}

SignedLogValue e_q_negative(double z, const QContext& ctx, const SeriesPolicy& policy) {
  const double q = ctx.q();
  const double qm1 = q - 1.0;
  const double log_q = std::log1p(qm1);
  int sign = 1;
  double log_sum = 0.0;
  double q_pow = q;
  int used = 0;
  double a = qm1 * z / q_pow;
  while (std::fabs(a) >= kProductTailSwitch) {
    if (++used > policy.max_terms) {
      throw SeriesExhausted("e_q: product for z = " + std::to_string(z) + " exceeded " +
                            std::to_string(policy.max_terms) + " factors");
    }
    const double factor = 1.0 + a;
    if (std::fabs(factor) <= std::numeric_limits<double>::epsilon()) return {};
    if (factor < 0) sign = -sign;
    log_sum += a < -0.5 ? std::log(std::fabs(factor)) : std::log1p(a);
    q_pow *= q;
    a = qm1 * z / q_pow;
  }
  // Remaining factors a, a/q, a/q^2, ... (all |.| < 1/4):
  // sum_i log(1 + a q^{-i}) = sum_r (-1)^{r+1} a^r / (r (1 - q^{-r})).
  double tail = 0.0;
  double a_pow = 1.0;
  for (int r = 1;; ++r) {
    if (++used > policy.max_terms) {
      throw SeriesExhausted("e_q: product tail for z = " + std::to_string(z) +
                            " did not converge");
    }
    a_pow *= a;
    const double denom = -std::expm1(-r * log_q) * r;
    const double term = ((r % 2) ? a_pow : -a_pow) / denom;
    tail += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(tail) || a_pow == 0.0) break;
  }
  return SignedLogValue::from_log(sign, log_sum + tail);
}

}  // namespace

SignedLogValue e_q(double z, const QContext& ctx, const SeriesPolicy& policy) {
  policy.validate();
  if (!std::isfinite(z)) throw std::invalid_argument("e_q: argument must be finite");
  if (z == 0.0) return SignedLogValue::one();
  return z > 0 ? e_q_positive(z, ctx, policy) : e_q_negative(z, ctx, policy);
}

double big_e_q(double z, const QContext& ctx, const SeriesPolicy& policy) {
  policy.validate();
  const double q = ctx.q();
  const double radius = 1.0 / (q - 1.0);
  if (!(std::fabs(z) < radius)) {
    throw std::domain_error("E_q: |z| = " + std::to_string(std::fabs(z)) +
                            " is outside the convergence domain |z| < " + std::to_string(radius));
  }
  const double limit_ratio = std::fabs(z) * (q - 1.0) / q;
  double term = 1.0;
  double sum = 1.0;
  double q_pow = 1.0;  // q^k
  for (int k = 0; k < policy.max_terms; ++k) {
    term *= q_pow * z / q_integer(k + 1, ctx);
    sum += term;
    q_pow *= q;
    if (std::fabs(term) * limit_ratio / (1.0 - limit_ratio) <= policy.rel_tol * std::fabs(sum)) {
      return sum;
    }
  }
  throw SeriesExhausted("E_q: series for z = " + std::to_string(z) + " did not converge");
}

double e_q_zero(int j, const QContext& ctx) {
  if (j < 0) throw std::invalid_argument("e_q_zero: j must be >= 0");
  return -std::pow(ctx.q(), j + 1) / (ctx.q() - 1.0);
}

}  // namespace qszasz
