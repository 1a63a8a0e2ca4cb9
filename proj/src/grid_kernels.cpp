#include "qszasz/grid_kernels.hpp"

#include <cmath>
#include <cstdint>

#include "qszasz/errors.hpp"

namespace qszasz {

bool GridValues::ok() const {
  for (const auto& f : failures) {
    if (!f.empty()) return false;
  }
  return true;
}

std::string GridValues::first_failure() const {
  for (const auto& f : failures) {
    if (!f.empty()) return f;
  }
  return {};
}

namespace {

template <class Fn>
GridValues map_grid(std::span<const double> xs, Fn&& fn, Execution exec) {
  const auto count = static_cast<std::int64_t>(xs.size());
  GridValues out{std::vector<double>(xs.size(), std::nan("")),
                 std::vector<std::string>(xs.size())};
  std::vector<char> numeric(xs.size(), 0);
  auto body = [&](std::int64_t i) {
    try {
      out.values[i] = fn(xs[i]);
    } catch (const SeriesExhausted& e) {
      out.failures[i] = e.what();
      numeric[i] = 1;
    } catch (const PrecisionExhausted& e) {
      out.failures[i] = e.what();
      numeric[i] = 1;
    } catch (const std::exception& e) {
      out.failures[i] = e.what();
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) body(i);
  }
  for (char c : numeric) out.numerical_failure = out.numerical_failure || c;
  return out;
}

}  // namespace

GridValues deviation_on_grid(const RealFunction& f, std::span<const double> xs,
                             const QContext& ctx, const SeriesPolicy& policy, Execution exec) {
  return map_grid(
      xs, [&](double x) { return operator_deviation(f, x, ctx, policy); }, exec);
}

GridValues classical_deviation_on_grid(const RealFunction& f, std::span<const double> xs, int n,
                                       const SeriesPolicy& policy, Execution exec) {
  return map_grid(
      xs, [&](double x) { return classical_szasz(f, x, n, policy) - f(x); }, exec);
}

SteklovValue steklov_point(const RealFunction& f, double h, double x, const GaussRule& rule) {
  const double a = 0.5 * h;  // side of the integration square
  const std::size_t m = rule.nodes.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double s = 0.5 * a * (rule.nodes[i] + 1.0);
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double t = 0.5 * a * (rule.nodes[j] + 1.0);
      inner += rule.weights[j] * (2.0 * f(x + s + t) - f(x + 2.0 * (s + t)));
    }
    acc += rule.weights[i] * inner;
  }
  // The Jacobian (a/2)^2 times 4/h^2 = 1/a^2 leaves 1/4.
  const double fh = 0.25 * acc;
  auto second_difference = [&](double step) {
    return f(x + 2.0 * step) - 2.0 * f(x + step) + f(x);
  };
  const double fh2 = (8.0 * second_difference(a) - second_difference(h)) / (h * h);
  return {fh, fh2};
}

SteklovGrid steklov_on_grid(const RealFunction& f, double h, std::span<const double> xs,
                            const GaussRule& rule, Execution exec) {
  SteklovGrid out{std::vector<double>(xs.size()), std::vector<double>(xs.size())};
  const auto count = static_cast<std::int64_t>(xs.size());
  auto body = [&](std::int64_t i) {
    const SteklovValue v = steklov_point(f, h, xs[i], rule);
    out.fh[i] = v.fh;
    out.fh2[i] = v.fh2;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) body(i);
  }
  return out;
}

}  // namespace qszasz
