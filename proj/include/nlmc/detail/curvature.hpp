#pragma once

#include <cstddef>
#include <vector>

#include "nlmc/kernels.hpp"

namespace nlmc::detail {

/// Per-row law-Lipschitz constants of the one-step kernel:
/// max_{a != b} (1/2) sum_j |c[x][j][a] - c[x][j][b]|.
std::vector<double> row_lambdas(const AffineKernel& k);

/// Global derivative bounds of mu -> Q^(steps)_mu(x, .) in the L1 norm, per
/// starting state x, over the whole simplex and for unit zero-sum directions
/// d, e:
///   lipschitz[x]        >= |D Q(x)[d]|
///   curvature[x]        >= |D^2 Q(x)[d, d]|
///   mixed_curvature[x]  >= |D^3 Q(x)[d, d, e]|
struct CurvatureBounds {
  std::vector<double> lipschitz;
  std::vector<double> curvature;
  std::vector<double> mixed_curvature;
};

CurvatureBounds curvature_bounds(const AffineKernel& k, std::size_t steps);

}  // namespace nlmc::detail
