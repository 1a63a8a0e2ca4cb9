#include "qszasz/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "qszasz/detail/hp_kernels.hpp"
#include "qszasz/errors.hpp"

namespace qszasz {

namespace {

constexpr double kLn10 = 2.302585092994046;
constexpr double kGuardDigits = 25.0;
constexpr double kNegligibleLog = -690.0;  // ~1e-300

// Output of the double-precision planning sweep over k.
struct Plan {
  int K = 0;
  double max_log_magnitude = -std::numeric_limits<double>::infinity();
  double tail_bound = 0.0;
  std::vector<char> skip;  // nodes whose f value is non-finite but negligible
};

double node_value(int k, const QContext& ctx, double log_n_int) {
  const double num = q_integer(k, ctx);
  const double den = q_integer(ctx.n(), ctx);
  if (std::isfinite(num) && std::isfinite(den)) return num / den;
  return std::exp(log_q_integer(k, ctx) - log_n_int);
}

// Walks k upward in log space to find the truncation index and the largest
// term magnitude. Terms are bounded by c_k |f(t_k)| once the magnitude peak is
// behind us and every factor of e_q(-[n] q^{-k} x) is positive (|e_q| <= 1).
Plan plan_table(double x, const QContext& ctx, const SeriesPolicy& policy, const RealFunction* f,
                double fx, double log_scale) {
  const double log_q = std::log1p(ctx.q() - 1.0);
  const double log_qm1 = std::log(ctx.q() - 1.0);
  const double log_n_int = log_q_integer(ctx.n(), ctx);
  const double log_y = log_n_int + std::log(x);
  const double log_thresh = std::log(policy.rel_tol) + log_scale;

  Plan plan;
  double log_c = 0.0;
  int below = 0;
  bool past_peak = false;
  for (int k = 0;; ++k) {
    if (k > policy.max_terms) {
      throw SeriesExhausted("weight series at x = " + std::to_string(x) +
                            " did not truncate within " + std::to_string(policy.max_terms) +
                            " terms");
    }
    const double log_arg = log_y - k * log_q;
    const SignedLogValue e = e_q(-std::exp(log_arg), ctx, policy);
    const double log_w = log_c + e.log_abs();

    double log_f = 0.0;
    if (f != nullptr) {
      const double t = node_value(k, ctx, log_n_int);
      const double fk = (*f)(t);
      if (!std::isfinite(fk)) {
        if (log_w > kNegligibleLog) {
          throw NonFiniteValue("function is not finite at node " + std::to_string(t), t);
        }
        plan.skip.resize(k + 1, 0);
        plan.skip[k] = 1;
        log_f = -std::numeric_limits<double>::infinity();
      } else {
        log_f = std::log(std::fabs(fk - fx));
      }
    }
    plan.max_log_magnitude = std::max(plan.max_log_magnitude, log_w + std::max(0.0, log_f));

    const double log_ratio = log_y - k * log_q - log_q_integer(k + 1, ctx);
    if (log_ratio <= 0.0) past_peak = true;
    const bool factors_positive = log_qm1 + log_arg - log_q < 0.0;
    if (past_peak && factors_positive) {
      below = (log_c + log_f < log_thresh) ? below + 1 : 0;
      if (below >= policy.post_peak_window) {
        plan.K = k;
        const double log_c_next = log_c + log_ratio;
        const double next_ratio = std::exp(log_y - (k + 1) * log_q - log_q_integer(k + 2, ctx));
        plan.tail_bound = std::exp(log_c_next) / (1.0 - std::min(next_ratio, 0.5));
        plan.skip.resize(k + 1, 0);
        return plan;
      }
    }
    log_c += log_ratio;
  }
}

struct PassInput {
  double q;
  int n;
  double x;
  int K;
  int max_terms;
  const RealFunction* f = nullptr;
  bool centered = false;
  bool want_weights = false;
  const std::vector<char>* skip = nullptr;
};

struct PassResult {
  double sum = 0.0;
  double partition_defect = 0.0;
  std::vector<double> weights;
};

// Builds the weights at working precision: e_q at the last index directly,
// then downward through e_q(z) = (1 + (q-1) z / q) e_q(z / q).
template <class Real>
PassResult run_pass(const PassInput& in) {
  const Real q = in.q;
  const Real qm1 = q - 1;
  const Real n_int = detail::q_integer_iter<Real>(in.n, q);
  const Real x = in.x;
  const Real y = n_int * x;
  const int K = in.K;

  std::vector<Real> q_pow(K + 2);
  q_pow[0] = 1;
  for (int i = 1; i < K + 2; ++i) q_pow[i] = q_pow[i - 1] * q;

  std::vector<Real> e(K + 1);
  e[K] = detail::e_q_nonpositive<Real>(Real(-y / q_pow[K]), q, in.max_terms);
  for (int k = K - 1; k >= 0; --k) e[k] = (1 - qm1 * y / q_pow[k + 1]) * e[k + 1];

  const Real fx = (in.f != nullptr && in.centered) ? in.f->eval<Real>(x) : Real(0);
  PassResult out;
  if (in.want_weights) out.weights.reserve(K + 1);
  Real c = 1;
  Real k_int = 0;
  Real sum = 0;
  Real weight_sum = 0;
  for (int k = 0; k <= K; ++k) {
    const Real w = c * e[k];
    weight_sum += w;
    if (in.f != nullptr && !(*in.skip)[k]) {
      const Real node = k_int / n_int;
      sum += (in.f->eval<Real>(node) - fx) * w;
    }
    if (in.want_weights) out.weights.push_back(hp::to_double(w));
    k_int = k_int * q + 1;
    c = c * y / (q_pow[k] * k_int);
  }
  out.sum = hp::to_double(sum);
  out.partition_defect = std::fabs(hp::to_double(Real(weight_sum - 1)));
  return out;
}

double working_digits(double max_log_magnitude, double log_scale, const SeriesPolicy& policy) {
  double digits = kGuardDigits + std::max(0.0, (max_log_magnitude - log_scale) / kLn10);
  digits += std::max(0.0, -std::log10(policy.rel_tol) - 14.0);
  return digits;
}

PassResult dispatch_pass(double digits, const PassInput& in) {
  return hp::with_precision(digits, [&](auto tag) {
    using Real = typename decltype(tag)::type;
    return run_pass<Real>(in);
  });
}

void check_x(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("x must be finite and >= 0 (got " + std::to_string(x) + ")");
  }
}

double evaluate(const RealFunction& f, double x, const QContext& ctx, const SeriesPolicy& policy,
                bool centered) {
  policy.validate();
  check_x(x);
  const double fx = f(x);
  if (!std::isfinite(fx)) throw NonFiniteValue("function is not finite at x = " + std::to_string(x), x);
  if (x == 0.0) return centered ? 0.0 : fx;

  double log_scale = std::log(std::max(std::fabs(fx), 1e-30));
  if (centered) {
    // The deviation is O(1/[n]); keep its relative accuracy, not f(x)'s.
    log_scale -= log_q_integer(ctx.n(), ctx) + 5.0 * kLn10;
  }
  const Plan plan = plan_table(x, ctx, policy, &f, centered ? fx : 0.0, log_scale);
  PassInput in{ctx.q(), ctx.n(), x, plan.K, policy.max_terms};
  in.f = &f;
  in.centered = centered;
  in.skip = &plan.skip;
  const PassResult r = dispatch_pass(working_digits(plan.max_log_magnitude, log_scale, policy), in);
  return r.sum;
}

}  // namespace

SignedLogValue weight_signed_log(int k, double x, const QContext& ctx,
                                 const SeriesPolicy& policy) {
  if (k < 0) throw std::invalid_argument("weight: k must be >= 0");
  check_x(x);
  if (x == 0.0) return k == 0 ? SignedLogValue::one() : SignedLogValue{};
  const double log_q = std::log1p(ctx.q() - 1.0);
  const double log_y = log_q_integer(ctx.n(), ctx) + std::log(x);
  double z = -q_integer(ctx.n(), ctx) * x / std::pow(ctx.q(), k);
  if (!std::isfinite(z) || z == 0.0) z = -std::exp(log_y - k * log_q);
  const SignedLogValue e = e_q(z, ctx, policy);
  if (k == 0) return e;
  const double kd = static_cast<double>(k);
  const double log_c =
      kd * log_y - 0.5 * kd * (kd - 1.0) * log_q - q_factorial(k, ctx).log_abs();
  return SignedLogValue::from_log(1, log_c) * e;
}

double weight(int k, double x, const QContext& ctx, const SeriesPolicy& policy) {
  return weight_signed_log(k, x, ctx, policy).to_real();
}

WeightTable weight_table(double x, const QContext& ctx, const SeriesPolicy& policy) {
  policy.validate();
  check_x(x);
  WeightTable table{ctx, x, 0, {}, {}};
  if (x == 0.0) {
    table.weights = {1.0};
    table.nodes = {0.0};
    return table;
  }
  const Plan plan = plan_table(x, ctx, policy, nullptr, 0.0, 0.0);
  PassInput in{ctx.q(), ctx.n(), x, plan.K, policy.max_terms};
  in.want_weights = true;
  const double digits = working_digits(plan.max_log_magnitude, 0.0, policy);
  const PassResult r = dispatch_pass(digits, in);

  const double log_n_int = log_q_integer(ctx.n(), ctx);
  table.K = plan.K;
  table.weights = r.weights;
  table.nodes.reserve(plan.K + 1);
  for (int k = 0; k <= plan.K; ++k) table.nodes.push_back(node_value(k, ctx, log_n_int));
  table.tail_bound = plan.tail_bound;
  table.partition_defect = r.partition_defect;
  table.working_digits = hp::tier_for(digits);
  return table;
}

double apply_operator(const RealFunction& f, double x, const QContext& ctx,
                      const SeriesPolicy& policy) {
  return evaluate(f, x, ctx, policy, false);
}

double operator_deviation(const RealFunction& f, double x, const QContext& ctx,
                          const SeriesPolicy& policy) {
  return evaluate(f, x, ctx, policy, true);
}

double classical_szasz(const RealFunction& f, double x, int n, const SeriesPolicy& policy) {
  policy.validate();
  check_x(x);
  if (n < 1) throw std::invalid_argument("classical_szasz: n must be >= 1");
  const double fx = f(x);
  if (!std::isfinite(fx)) throw NonFiniteValue("function is not finite at x = " + std::to_string(x), x);
  if (x == 0.0) return fx;

  const double lambda = n * x;
  const double log_lambda = std::log(lambda);
  const double scale = std::max(std::fabs(fx), 1e-30);
  // Neumaier summation; all weights are positive.
  double sum = 0.0;
  double comp = 0.0;
  int below = 0;
  for (int k = 0; k <= policy.max_terms; ++k) {
    const double w = std::exp(-lambda + k * log_lambda - std::lgamma(k + 1.0));
    const double t = static_cast<double>(k) / n;
    const double fk = f(t);
    if (!std::isfinite(fk)) {
      if (w > 1e-300) throw NonFiniteValue("function is not finite at node " + std::to_string(t), t);
      continue;
    }
    const double term = fk * w;
    const double next = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
    if (k >= lambda) {
      below = std::fabs(term) < policy.rel_tol * scale ? below + 1 : 0;
      if (below >= policy.post_peak_window) return sum + comp;
    }
  }
  throw SeriesExhausted("classical Szasz series at x = " + std::to_string(x) +
                        " did not truncate within " + std::to_string(policy.max_terms) + " terms");
}

double weight_identity_residual(int k, double x, const QContext& ctx,
                                const SeriesPolicy& policy) {
  if (k < 0) throw std::invalid_argument("weight_identity_residual: k must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("weight_identity_residual: x must be > 0");
  }
  const double lx = weight_signed_log(k, x, ctx, policy).log_abs();
  const double lqx = weight_signed_log(k, ctx.q() * x, ctx, policy).log_abs();
  const double log_mag = std::max({lx, lqx, 0.0});
  const double digits = kGuardDigits + 5.0 + log_mag / kLn10;

  return hp::with_precision(digits, [&](auto tag) {
    using Real = typename decltype(tag)::type;
    const Real q = ctx.q();
    const Real n_int = detail::q_integer_iter<Real>(ctx.n(), q);
    const Real k_int = detail::q_integer_iter<Real>(k, q);
    auto s = [&](const Real& at) {
      const Real y = n_int * at;
      Real c = 1;
      Real q_pow = 1;
      for (int i = 0; i < k; ++i) {
        c = c * y / (q_pow * detail::q_integer_iter<Real>(i + 1, q));
        q_pow *= q;
      }
      return c * detail::e_q_nonpositive<Real>(Real(-y / q_pow), q, policy.max_terms);
    };
    const Real xr = x;
    const Real s_x = s(xr);
    const Real s_qx = s(Real(q * xr));
    const Real residual = (s_qx - s_x) / (q - 1) - (k_int - n_int * xr) * s_x;
    return hp::to_double(residual);
  });
}

PositivityReport positivity_scan(const QContext& ctx, std::span<const double> xs,
                                 const SeriesPolicy& policy) {
  PositivityReport report;
  double x_max = 0.0;
  for (double x : xs) {
    check_x(x);
    x_max = std::max(x_max, x);
    const WeightTable table = weight_table(x, ctx, policy);
    for (int k = 0; k <= table.K; ++k) {
      if (table.weights[k] < -1e-13) report.negatives.push_back({k, x, table.weights[k]});
    }
  }
  const double lowest_arg = -q_integer(ctx.n(), ctx) * x_max;
  for (int j = 0; j < policy.max_terms; ++j) {
    const double z = e_q_zero(j, ctx);
    if (z < lowest_arg) break;
    report.zeros.push_back({j, z});
  }
  return report;
}

}  // namespace qszasz
