#pragma once

#include <vector>

#include "qszasz/qcore.hpp"

namespace qszasz {

/// Triangle S_q(m, j), 0 <= j <= m <= m_max, stored as reals at a fixed q.
///
/// Filled by S_q(m+1, j) = [j]_q S_q(m, j) + S_q(m, j-1) with S_q(0,0) = 1.
class QStirlingTable {
 public:
  double q() const noexcept { return q_; }
  int m_max() const noexcept { return m_max_; }

  /// Zero outside the triangle.
  double operator()(int m, int j) const;

 private:
  friend QStirlingTable qstirling_table(int m_max, const QContext& ctx);
  friend QStirlingTable classical_stirling_table(int m_max);

  QStirlingTable(int m_max, double q, const std::vector<double>& q_ints);

  double q_ = 1.0;
  int m_max_ = 0;
  std::vector<double> entries_;
};

QStirlingTable qstirling_table(int m_max, const QContext& ctx);

/// Stirling numbers of the second kind (the q = 1 recurrence).
QStirlingTable classical_stirling_table(int m_max);

/// M_{n,q}(t^m; x) as a polynomial in x; coeffs[j] = S_q(m,j) / [n]^{m-j}.
struct MomentPolynomial {
  int m = 0;
  std::vector<double> coeffs;  // size m + 1

  double operator()(double x) const;
};

inline constexpr int kDefaultMomentCap = 12;

MomentPolynomial moment_polynomial(int m, const QContext& ctx, int m_cap = kDefaultMomentCap);

enum class MomentMethod { polynomial, recurrence1, series };

/// M_{n,q}(t^m; x) by the q-Stirling polynomial, the scaled-argument
/// recurrence, or direct summation of the operator series.
double raw_moment(int m, double x, const QContext& ctx, MomentMethod method,
                  const SeriesPolicy& policy = {}, int m_cap = kDefaultMomentCap);

/// M_{n,q}((t - x)^r; x) for 0 <= r <= 8 by binomial expansion of the moment
/// polynomials, collected by powers of x before evaluation.
double central_moment(int r, double x, const QContext& ctx);

/// Closed forms for r = 2, 3, 4. Throws std::invalid_argument otherwise.
double reference_central_moment(int r, double x, const QContext& ctx);

}  // namespace qszasz
