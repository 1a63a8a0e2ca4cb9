#pragma once

// Fixed-precision MPFR tiers used where the operator weights cancel.
//
// The q-Szasz weights alternate in sign and can reach 1e40 and beyond while
// still summing to 1, so every series evaluation runs at a working precision
// chosen from the largest weight magnitude. Each tier has its precision baked
// into the type, which keeps the kernels free of global precision state and
// safe to run from several threads.

#include <array>
#include <boost/multiprecision/mpfr.hpp>
#include <string>
#include <type_traits>

#include "qszasz/errors.hpp"

namespace qszasz::hp {

template <unsigned Digits10>
using Float = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<Digits10>,
                                            boost::multiprecision::et_off>;

using F40 = Float<40>;
using F80 = Float<80>;
using F160 = Float<160>;
using F320 = Float<320>;
using F640 = Float<640>;

inline constexpr std::array<unsigned, 5> kTierDigits{40, 80, 160, 320, 640};
inline constexpr unsigned kMaxDigits = kTierDigits.back();

template <class Real>
struct Tag {
  using type = Real;
};

/// Smallest tier with at least `digits` decimal digits.
inline unsigned tier_for(double digits) {
  for (unsigned d : kTierDigits) {
    if (digits <= d) return d;
  }
  throw PrecisionExhausted("required working precision of " + std::to_string(digits) +
                           " digits exceeds the largest tier (" + std::to_string(kMaxDigits) +
                           ")");
}

/// Calls fn(Tag<Real>{}) with the smallest tier holding `digits` digits.
template <class Fn>
decltype(auto) with_precision(double digits, Fn&& fn) {
  switch (tier_for(digits)) {
    case 40:
      return fn(Tag<F40>{});
    case 80:
      return fn(Tag<F80>{});
    case 160:
      return fn(Tag<F160>{});
    case 320:
      return fn(Tag<F320>{});
    default:
      return fn(Tag<F640>{});
  }
}

template <class Real>
inline double to_double(const Real& v) {
  if constexpr (std::is_same_v<Real, double>) {
    return v;
  } else {
    return v.template convert_to<double>();
  }
}

}  // namespace qszasz::hp
