#pragma once

#include <functional>
#include <tuple>
#include <utility>

#include "qszasz/precision.hpp"

namespace qszasz {

/// A real function that can be evaluated in double and in every working
/// precision tier.
///
/// Build it with `generic` from a lambda taking `auto` so that the high
/// precision evaluations are genuine. `plain` wraps a double-only callable;
/// its high precision evaluations round through double, which limits the
/// accuracy of operator sums with large cancelling weights.
class RealFunction {
 public:
  template <class Real>
  using HpFn = std::function<Real(const Real&)>;

  RealFunction() = default;

  template <class G>
  static RealFunction generic(G g) {
    RealFunction f;
    f.plain_ = [g](double t) { return static_cast<double>(g(t)); };
    f.hp_ = HpTuple{make_hp<hp::F40>(g), make_hp<hp::F80>(g), make_hp<hp::F160>(g),
                    make_hp<hp::F320>(g), make_hp<hp::F640>(g)};
    f.exact_hp_ = true;
    return f;
  }

  static RealFunction plain(std::function<double(double)> g) {
    RealFunction f;
    f.plain_ = g;
    f.hp_ = HpTuple{through_double<hp::F40>(g), through_double<hp::F80>(g),
                    through_double<hp::F160>(g), through_double<hp::F320>(g),
                    through_double<hp::F640>(g)};
    f.exact_hp_ = false;
    return f;
  }

  explicit operator bool() const { return static_cast<bool>(plain_); }

  double operator()(double t) const { return plain_(t); }

  template <class Real>
  Real eval(const Real& t) const {
    if constexpr (std::is_same_v<Real, double>) {
      return plain_(t);
    } else {
      return std::get<HpFn<Real>>(hp_)(t);
    }
  }

  const std::function<double(double)>& as_std_function() const { return plain_; }

  bool exact_in_high_precision() const { return exact_hp_; }

 private:
  using HpTuple = std::tuple<HpFn<hp::F40>, HpFn<hp::F80>, HpFn<hp::F160>, HpFn<hp::F320>,
                             HpFn<hp::F640>>;

  template <class Real, class G>
  static HpFn<Real> make_hp(G g) {
    return [g](const Real& t) { return Real(g(t)); };
  }

  template <class Real>
  static HpFn<Real> through_double(std::function<double(double)> g) {
    return [g](const Real& t) { return Real(g(t.template convert_to<double>())); };
  }

  std::function<double(double)> plain_;
  HpTuple hp_;
  bool exact_hp_ = false;
};

}  // namespace qszasz
