#pragma once

#include <vector>

namespace qszasz {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration on P_n from the Tricomi initial guesses.
GaussRule gauss_legendre(int n);

}  // namespace qszasz
