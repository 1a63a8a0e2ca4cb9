#include "qszasz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "qszasz/errors.hpp"
#include "qszasz/quadrature.hpp"

namespace qszasz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kModulusSteps = 32;
constexpr int kProfileSteps = 128;

void check_range(NRange r) {
  if (r.min < 1 || r.max < r.min) throw std::invalid_argument("n range must satisfy 1 <= nmin <= nmax");
}

double finite_or_throw(double v, double x, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteValue(std::string(what) + ": non-finite value", x);
  return v;
}

double second_difference(const std::function<double(double)>& f, double x, double h) {
  return f(x + 2.0 * h) - 2.0 * f(x + h) + f(x);
}

// sup_x w_p(x) |D2_h f(x)| for a single h.
double weighted_second_difference_sup(const WeightedFunction& wf, double h,
                                      const std::vector<double>& xs) {
  const auto& f = wf.f.as_std_function();
  double best = 0.0;
  for (double x : xs) {
    const double d = finite_or_throw(second_difference(f, x, h), x, "second_modulus");
    best = std::max(best, weight_function(wf.p, x) * std::fabs(d));
  }
  return best;
}

struct SupResult {
  double value = 0.0;
  double x = kNaN;
};

SupResult weighted_sup(const std::vector<double>& values, const std::vector<double>& xs, int p) {
  SupResult out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = weight_function(p, xs[i]) * std::fabs(values[i]);
    if (v > out.value || std::isnan(out.x)) {
      out.value = v;
      out.x = xs[i];
    }
  }
  return out;
}

GridValues deviations(const WeightedFunction& wf, const std::vector<double>& xs, double q, int n,
                      const SeriesPolicy& policy, bool classical, Execution exec) {
  if (classical) return classical_deviation_on_grid(wf.f, xs, n, policy, exec);
  return deviation_on_grid(wf.f, xs, QContext(q, n), policy, exec);
}

// Running-max profile of h -> sup_x w_p |D2_h f| used to evaluate
// omega_p^2(f; delta) at many delta values.
class ModulusProfile {
 public:
  ModulusProfile(const WeightedFunction& wf, double delta_max, const std::vector<double>& xs,
                 Execution exec)
      : wf_(wf), xs_(xs) {
    hs_.resize(kProfileSteps);
    sup_.resize(kProfileSteps);
    const double ratio = std::pow(1e-4, 1.0 / (kProfileSteps - 1));
    for (int i = 0; i < kProfileSteps; ++i) {
      hs_[kProfileSteps - 1 - i] = delta_max * std::pow(ratio, i);
    }
    auto body = [&](std::int64_t i) { sup_[i] = weighted_second_difference_sup(wf_, hs_[i], xs_); };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (std::int64_t i = 0; i < kProfileSteps; ++i) body(i);
    } else {
      for (std::int64_t i = 0; i < kProfileSteps; ++i) body(i);
    }
    for (int i = 1; i < kProfileSteps; ++i) sup_[i] = std::max(sup_[i], sup_[i - 1]);
  }

  double operator()(double delta) const {
    const auto it = std::upper_bound(hs_.begin(), hs_.end(), delta);
    double best = weighted_second_difference_sup(wf_, delta, xs_);
    if (it != hs_.begin()) best = std::max(best, sup_[std::distance(hs_.begin(), it) - 1]);
    return best;
  }

 private:
  const WeightedFunction& wf_;
  const std::vector<double>& xs_;
  std::vector<double> hs_;
  std::vector<double> sup_;
};

}  // namespace

void WeightedFunction::validate() const {
  if (p < 0) throw std::invalid_argument("weight order p must be >= 0");
  if (!f) throw std::invalid_argument("function is empty");
  if (!f2) return;
  constexpr double h = 1e-3;
  for (double x : {0.5, 1.5, 3.0}) {
    const double fd = second_difference(f.as_std_function(), x - h, h) / (h * h);
    const double exact = f2(x);
    if (!(std::fabs(fd - exact) <= 1e-4 * std::max(1.0, std::fabs(exact)))) {
      throw std::invalid_argument("f2 disagrees with finite differences at x=" + std::to_string(x));
    }
  }
}

double weight_function(int p, double x) {
  if (p == 0) return 1.0;
  return 1.0 / (1.0 + std::pow(x, p));
}

void GridSpec::validate() const {
  if (count < 2) throw std::invalid_argument("grid count must be >= 2");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw std::invalid_argument("grid x_max must be > 0");
}

std::vector<double> GridSpec::points() const {
  validate();
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i) xs[i] = x_max * i / (count - 1);
  xs.back() = x_max;
  return xs;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("fit_line needs at least two points");
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double weighted_norm(const WeightedFunction& wf, const GridSpec& grid) {
  double best = 0.0;
  for (double x : grid.points()) {
    const double v = finite_or_throw(wf.f(x), x, "weighted_norm");
    best = std::max(best, weight_function(wf.p, x) * std::fabs(v));
  }
  return best;
}

double second_modulus(const WeightedFunction& wf, double delta, const GridSpec& grid) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  const auto xs = grid.points();
  const double ratio = std::pow(1e-3, 1.0 / (kModulusSteps - 1));
  double best = 0.0;
  double h = delta;
  for (int i = 0; i < kModulusSteps; ++i, h *= ratio) {
    best = std::max(best, weighted_second_difference_sup(wf, h, xs));
  }
  return best;
}

double first_modulus(const std::function<double(double)>& f, double delta, const GridSpec& grid) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  const auto xs = grid.points();
  std::vector<double> fx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) fx[i] = finite_or_throw(f(xs[i]), xs[i], "first_modulus");
  double best = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size() && xs[j] - xs[i] <= delta; ++j) {
      best = std::max(best, std::fabs(fx[j] - fx[i]));
    }
    if (xs[i] + delta <= grid.x_max) {
      const double y = finite_or_throw(f(xs[i] + delta), xs[i] + delta, "first_modulus");
      best = std::max(best, std::fabs(y - fx[i]));
    }
  }
  return best;
}

SteklovValue steklov(const WeightedFunction& wf, double h, double x, int quad_points) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
  if (!(x >= 0.0)) throw std::invalid_argument("x must be >= 0");
  return steklov_point(wf.f, h, x, gauss_legendre(quad_points));
}

SteklovCheck steklov_check(const WeightedFunction& wf, double h, const GridSpec& grid,
                           int quad_points, Execution exec) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
  const auto xs = grid.points();
  const auto values = steklov_on_grid(wf.f, h, xs, gauss_legendre(quad_points), exec);
  SteklovCheck out{};
  out.h = h;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = weight_function(wf.p, xs[i]);
    const double fx = finite_or_throw(wf.f(xs[i]), xs[i], "steklov_check");
    out.error_norm = std::max(out.error_norm, w * std::fabs(fx - values.fh[i]));
    out.fh2_norm = std::max(out.fh2_norm, w * std::fabs(values.fh2[i]));
  }
  out.omega2 = second_modulus(wf, h, grid);
  out.fh2_ratio = out.fh2_norm * h * h / out.omega2;
  out.error_bound_holds = out.error_norm <= out.omega2 * (1.0 + 1e-6);
  return out;
}

ExperimentReport convergence_experiment(const WeightedFunction& wf, double q, NRange n_range,
                                        const GridSpec& grid, const SeriesPolicy& policy,
                                        bool classical_baseline, Execution exec) {
  check_range(n_range);
  if (!classical_baseline) QContext(q, n_range.min);
  const auto xs = grid.points();
  ExperimentReport report;
  std::vector<double> fit_x;
  std::vector<double> fit_y;
  for (int n = n_range.min; n <= n_range.max; ++n) {
    ReportRow row;
    row.n = n;
    row.q = classical_baseline ? 1.0 : q;
    row.metric = classical_baseline ? "classical_sup_weighted_error" : "sup_weighted_error";
    row.aux = classical_baseline ? n : q_integer(n, QContext(q, n));
    const auto dev = deviations(wf, xs, q, n, policy, classical_baseline, exec);
    if (!dev.ok()) {
      row.failure = dev.first_failure();
      row.lhs = row.rhs = row.ratio = kNaN;
      report.numerical_failure = report.numerical_failure || dev.numerical_failure;
      report.rows.push_back(row);
      continue;
    }
    const auto sup = weighted_sup(dev.values, xs, wf.p);
    row.lhs = sup.value;
    row.x = sup.x;
    row.rhs = kNaN;
    row.ratio = std::log(sup.value);
    if (sup.value > 0.0 && std::isfinite(row.ratio)) {
      fit_x.push_back(classical_baseline ? std::log(static_cast<double>(n)) : n);
      fit_y.push_back(row.ratio);
    }
    report.rows.push_back(row);
  }
  if (fit_x.size() >= 2) {
    const auto fit = fit_line(fit_x, fit_y);
    report.fitted_slope = fit.slope;
    report.fitted_intercept = fit.intercept;
  }
  return report;
}

ExperimentReport voronovskaja_scan(const WeightedFunction& wf, double q, double x, NRange n_range,
                                   const SeriesPolicy& policy) {
  check_range(n_range);
  if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
  if (!wf.f2) throw std::invalid_argument("voronovskaja_scan needs f2");
  const double half_x_f2 = 0.5 * x * wf.f2(x);
  double diagnostic = kNaN;
  if (wf.f3 && wf.f4) {
    diagnostic = half_x_f2 + (q - 1.0) * x * x / 6.0 * wf.f3(x) +
                 (q - 1.0) * (q - 1.0) * x * x * x / 24.0 * wf.f4(x);
  }
  ExperimentReport report;
  for (int n = n_range.min; n <= n_range.max; ++n) {
    const QContext ctx(q, n);
    ReportRow row;
    row.n = n;
    row.q = q;
    row.metric = "voronovskaja";
    row.x = x;
    row.rhs = half_x_f2;
    row.aux = diagnostic;
    try {
      row.lhs = q_integer(n, ctx) * operator_deviation(wf.f, x, ctx, policy);
      row.ratio = row.lhs / half_x_f2;
    } catch (const SeriesExhausted& e) {
      row.failure = e.what();
      report.numerical_failure = true;
    } catch (const PrecisionExhausted& e) {
      row.failure = e.what();
      report.numerical_failure = true;
    }
    if (!row.failure.empty()) row.lhs = row.ratio = kNaN;
    report.rows.push_back(row);
  }
  return report;
}

ExperimentReport bound_check(BoundMode mode, const WeightedFunction& wf, double q, NRange n_range,
                             const GridSpec& grid, const SeriesPolicy& policy, Execution exec) {
  check_range(n_range);
  QContext(q, n_range.min);
  if (mode == BoundMode::local && !wf.f2) throw std::invalid_argument("local bound needs f2");
  const auto xs = grid.points();
  ExperimentReport report;

  double g2_norm = 0.0;
  if (mode == BoundMode::local) {
    for (double x : xs) {
      g2_norm = std::max(g2_norm, weight_function(wf.p, x) *
                                      std::fabs(finite_or_throw(wf.f2(x), x, "bound_check")));
    }
  }

  std::optional<ModulusProfile> profile;
  if (mode == BoundMode::global) {
    const double delta_max = std::sqrt(grid.x_max / q_integer(n_range.min, QContext(q, n_range.min)));
    profile.emplace(wf, delta_max, xs, exec);
  }

  // f*(z) = f(z^2) on a z-grid covering the image of the x-grid.
  const GridSpec z_grid{std::sqrt(grid.x_max), grid.count};
  const auto& fplain = wf.f.as_std_function();
  const auto f_star = [&fplain](double z) { return fplain(z * z); };

  double constant = 0.0;
  for (int n = n_range.min; n <= n_range.max; ++n) {
    const QContext ctx(q, n);
    const double qn = q_integer(n, ctx);
    ReportRow row;
    row.n = n;
    row.q = q;
    row.aux = qn;
    const auto dev = deviation_on_grid(wf.f, xs, ctx, policy, exec);
    if (!dev.ok()) {
      row.metric = "failed";
      row.failure = dev.first_failure();
      row.lhs = row.rhs = row.ratio = kNaN;
      report.numerical_failure = report.numerical_failure || dev.numerical_failure;
      report.rows.push_back(row);
      continue;
    }
    switch (mode) {
      case BoundMode::local:
      case BoundMode::global: {
        row.metric = mode == BoundMode::local ? "local" : "global";
        row.ratio = 0.0;
        row.lhs = row.rhs = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double x = xs[i];
          if (x <= 0.0) continue;
          const double lhs = weight_function(wf.p, x) * std::fabs(dev.values[i]);
          const double rhs = mode == BoundMode::local ? g2_norm * x / qn
                                                      : (*profile)(std::sqrt(x / qn));
          if (!(rhs > 0.0)) continue;
          const double ratio = lhs / rhs;
          if (ratio > row.ratio || std::isnan(row.x)) {
            row.ratio = ratio;
            row.lhs = lhs;
            row.rhs = rhs;
            row.x = x;
          }
        }
        constant = std::max(constant, row.ratio);
        break;
      }
      case BoundMode::sqrtmod: {
        row.metric = "sqrtmod";
        const auto sup = weighted_sup(dev.values, xs, 0);
        row.lhs = sup.value;
        row.x = sup.x;
        row.rhs = 2.0 * first_modulus(f_star, 1.0 / std::sqrt(qn), z_grid);
        row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : kNaN;
        if (row.lhs > row.rhs) report.bound_violated = true;
        break;
      }
    }
    report.rows.push_back(row);
  }
  if (mode != BoundMode::sqrtmod) report.fitted_constant = constant;
  return report;
}

}  // namespace qszasz
