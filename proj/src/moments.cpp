#include "qszasz/moments.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "qszasz/operator.hpp"

namespace qszasz {

namespace {

double binomial(int m, int j) {
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c = c * (m - j + i) / i;
  return c;
}

// 1 / [n]^e, through logs when the power overflows.
double inverse_power(double n_int, double log_n_int, int e) {
  if (e == 0) return 1.0;
  const double p = std::pow(n_int, e);
  if (std::isfinite(p)) return 1.0 / p;
  return std::exp(-e * log_n_int);
}

void check_m(int m, int cap) {
  if (m < 0 || m > cap) {
    throw std::invalid_argument("moment order " + std::to_string(m) + " outside [0, " +
                                std::to_string(cap) + "]");
  }
}

}  // namespace

QStirlingTable::QStirlingTable(int m_max, double q, const std::vector<double>& q_ints)
    : q_(q), m_max_(m_max), entries_((m_max + 1) * (m_max + 2) / 2, 0.0) {
  auto at = [this](int m, int j) -> double& { return entries_[m * (m + 1) / 2 + j]; };
  at(0, 0) = 1.0;
  for (int m = 0; m < m_max; ++m) {
    for (int j = 1; j <= m + 1; ++j) {
      const double same = j <= m ? at(m, j) : 0.0;
      at(m + 1, j) = q_ints[j] * same + at(m, j - 1);
    }
  }
}

double QStirlingTable::operator()(int m, int j) const {
  if (m < 0 || j < 0 || m > m_max_ || j > m) return 0.0;
  return entries_[m * (m + 1) / 2 + j];
}

QStirlingTable qstirling_table(int m_max, const QContext& ctx) {
  if (m_max < 0) throw std::invalid_argument("qstirling_table: m_max must be >= 0");
  std::vector<double> q_ints(m_max + 1);
  for (int j = 0; j <= m_max; ++j) q_ints[j] = q_integer(j, ctx);
  return QStirlingTable(m_max, ctx.q(), q_ints);
}

QStirlingTable classical_stirling_table(int m_max) {
  if (m_max < 0) throw std::invalid_argument("classical_stirling_table: m_max must be >= 0");
  std::vector<double> ints(m_max + 1);
  for (int j = 0; j <= m_max; ++j) ints[j] = j;
  return QStirlingTable(m_max, 1.0, ints);
}

double MomentPolynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

MomentPolynomial moment_polynomial(int m, const QContext& ctx, int m_cap) {
  check_m(m, m_cap);
  const QStirlingTable table = qstirling_table(m, ctx);
  const double n_int = q_integer(ctx.n(), ctx);
  const double log_n_int = log_q_integer(ctx.n(), ctx);
  MomentPolynomial poly{m, std::vector<double>(m + 1, 0.0)};
  if (m == 0) {
    poly.coeffs[0] = 1.0;
    return poly;
  }
  for (int j = 1; j <= m; ++j) {
    poly.coeffs[j] = table(m, j) * inverse_power(n_int, log_n_int, m - j);
  }
  return poly;
}

namespace {

// R(m, d) = M(t^m; x q^{-d}); R(m+1, d) = sum_j C(m,j) x_d q^j / [n]^{m-j} R(j, d+1).
class ScaledRecurrence {
 public:
  ScaledRecurrence(int m, double x, const QContext& ctx)
      : x_(x), q_(ctx.q()), n_int_(q_integer(ctx.n(), ctx)),
        log_n_int_(log_q_integer(ctx.n(), ctx)), size_(m + 1),
        memo_(static_cast<std::size_t>(size_) * size_) {}

  double value(int m, int depth) {
    if (m == 0) return 1.0;
    auto& slot = memo_[static_cast<std::size_t>(m) * size_ + depth];
    if (slot) return *slot;
    const int prev = m - 1;
    const double x_d = x_ * std::pow(q_, -depth);
    double acc = 0.0;
    for (int j = 0; j <= prev; ++j) {
      acc += binomial(prev, j) * x_d * std::pow(q_, j) * inverse_power(n_int_, log_n_int_, prev - j) *
             value(j, depth + 1);
    }
    slot = acc;
    return acc;
  }

 private:
  double x_;
  double q_;
  double n_int_;
  double log_n_int_;
  int size_;
  std::vector<std::optional<double>> memo_;
};

}  // namespace

double raw_moment(int m, double x, const QContext& ctx, MomentMethod method,
                  const SeriesPolicy& policy, int m_cap) {
  check_m(m, m_cap);
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("raw_moment: x must be >= 0");
  switch (method) {
    case MomentMethod::polynomial:
      return moment_polynomial(m, ctx, m_cap)(x);
    case MomentMethod::recurrence1:
      return ScaledRecurrence(m, x, ctx).value(m, 0);
    case MomentMethod::series: {
      const auto monomial = RealFunction::generic([m](auto t) {
        decltype(t) p = 1;
        for (int i = 0; i < m; ++i) p *= t;
        return p;
      });
      return apply_operator(monomial, x, ctx, policy);
    }
  }
  throw std::invalid_argument("raw_moment: unknown method");
}

double central_moment(int r, double x, const QContext& ctx) {
  if (r < 0 || r > 8) throw std::invalid_argument("central_moment: r must be in [0, 8]");
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("central_moment: x must be >= 0");
  // sum_i C(r,i) (-x)^{r-i} sum_j a_{i,j} x^j, collected as sum_l c_l x^l.
  std::vector<double> c(r + 1, 0.0);
  for (int i = 0; i <= r; ++i) {
    const MomentPolynomial p = moment_polynomial(i, ctx);
    const double outer = binomial(r, i) * (((r - i) % 2) ? -1.0 : 1.0);
    for (int j = 0; j <= i; ++j) c[j + r - i] += outer * p.coeffs[j];
  }
  double acc = 0.0;
  for (int l = r; l >= 0; --l) acc = acc * x + c[l];
  return acc;
}

double reference_central_moment(int r, double x, const QContext& ctx) {
  const double q = ctx.q();
  const double n_int = q_integer(ctx.n(), ctx);
  switch (r) {
    case 2:
      return x / n_int;
    case 3:
      return x / (n_int * n_int) + (q - 1.0) * x * x / n_int;
    case 4:
      return x / (n_int * n_int * n_int) + (q * q + 3.0 * q - 1.0) * x * x / (n_int * n_int) +
             (q - 1.0) * (q - 1.0) * x * x * x / n_int;
    default:
      throw std::invalid_argument("reference_central_moment: closed forms exist only for r = 2, 3, 4");
  }
}

}  // namespace qszasz
