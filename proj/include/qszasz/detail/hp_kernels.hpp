#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "qszasz/errors.hpp"
#include "qszasz/precision.hpp"

namespace qszasz::detail {

/// [m]_q by Horner on 1 + q + ... + q^{m-1}.
template <class Real>
Real q_integer_iter(std::int64_t m, const Real& q) {
  Real v = 0;
  for (std::int64_t i = 0; i < m; ++i) v = v * q + 1;
  return v;
}

template <class Real>
Real eps_of() {
  if constexpr (std::is_same_v<Real, double>) {
    return std::numeric_limits<double>::epsilon();
  } else {
    return std::numeric_limits<Real>::epsilon();
  }
}

/// e_q(z) for z <= 0 in the given precision.
///
/// Multiplies factors 1 + (q-1) z / q^{j+1} while they are at least 1/4 away
/// from 1, then closes the product with exp(sum_r (-1)^{r+1} a^r / (r(1-q^{-r}))).
template <class Real>
Real e_q_nonpositive(const Real& z, const Real& q, int max_terms) {
  using std::abs;
  using std::exp;
  if (z == 0) return Real(1);
  const Real qm1 = q - 1;
  Real product = 1;
  Real q_pow = q;
  Real a = qm1 * z / q_pow;
  int used = 0;
  const Real quarter = Real(1) / 4;
  while (abs(a) >= quarter) {
    if (++used > max_terms) {
      throw SeriesExhausted("e_q: product exceeded " + std::to_string(max_terms) + " factors");
    }
    product *= 1 + a;
    q_pow *= q;
    a = qm1 * z / q_pow;
  }
  const Real eps = eps_of<Real>();
  const Real inv_q = 1 / q;
  Real inv_q_pow = 1;
  Real a_pow = 1;
  Real tail = 0;
  for (int r = 1;; ++r) {
    if (++used > max_terms) throw SeriesExhausted("e_q: product tail did not converge");
    a_pow *= a;
    inv_q_pow *= inv_q;
    const Real term = (r % 2 ? a_pow : Real(-a_pow)) / (r * (1 - inv_q_pow));
    tail += term;
    if (abs(term) <= eps * abs(tail) || a_pow == 0) break;
  }
  return product * exp(tail);
}

}  // namespace qszasz::detail
