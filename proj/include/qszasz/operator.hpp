#pragma once

#include <span>
#include <vector>

#include "qszasz/qcore.hpp"
#include "qszasz/real_function.hpp"

namespace qszasz {

/// Truncated weight sequence s_{n,0..K}(q;x) of the q-Szasz operator.
///
/// `weights` are rounded to double from the working-precision values; sums
/// over them in double do not reproduce the operator when the weights are
/// large. Use apply_operator for that.
struct WeightTable {
  QContext ctx;
  double x = 0.0;
  int K = 0;
  std::vector<double> weights;
  std::vector<double> nodes;  // [k]/[n]
  double tail_bound = 0.0;
  double partition_defect = 0.0;  // |sum of weights - 1|, in working precision
  unsigned working_digits = 0;
};

/// s_{nk}(q;x) = q^{-k(k-1)/2} [n]^k x^k / [k]! * e_q(-[n] q^{-k} x), assembled
/// in signed-log form.
double weight(int k, double x, const QContext& ctx, const SeriesPolicy& policy = {});

SignedLogValue weight_signed_log(int k, double x, const QContext& ctx,
                                 const SeriesPolicy& policy = {});

WeightTable weight_table(double x, const QContext& ctx, const SeriesPolicy& policy = {});

/// M_{n,q}(f;x). Throws NonFiniteValue if f is not finite at a node whose
/// weight matters, SeriesExhausted if truncation needs more than max_terms.
double apply_operator(const RealFunction& f, double x, const QContext& ctx,
                      const SeriesPolicy& policy = {});

/// M_{n,q}(f;x) - f(x), summed as sum_k (f([k]/[n]) - f(x)) s_{nk}(q;x) so
/// that the difference keeps its relative accuracy when it is small.
double operator_deviation(const RealFunction& f, double x, const QContext& ctx,
                          const SeriesPolicy& policy = {});

/// Classical Szasz-Mirakjan operator sum_k f(k/n) e^{-nx} (nx)^k / k!.
double classical_szasz(const RealFunction& f, double x, int n, const SeriesPolicy& policy = {});

/// x D_q s_{nk}(x) - [n]([k]/[n] - x) s_{nk}(x), computed in working precision.
double weight_identity_residual(int k, double x, const QContext& ctx,
                                const SeriesPolicy& policy = {});

struct PositivityReport {
  struct NegativeWeight {
    int k;
    double x;
    double weight;
  };
  struct ZeroCrossing {
    int j;
    double z;  // z_j = -q^{j+1}/(q-1)
  };
  std::vector<NegativeWeight> negatives;
  std::vector<ZeroCrossing> zeros;  // zeros of e_q inside the scanned arguments
};

/// Lists every weight below -1e-13 on the grid and the zeros of e_q lying in
/// [-[n] max(x), 0). Diagnostic only.
PositivityReport positivity_scan(const QContext& ctx, std::span<const double> xs,
                                 const SeriesPolicy& policy = {});

}  // namespace qszasz
