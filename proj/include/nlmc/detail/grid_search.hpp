#pragma once

#include <cstddef>
#include <span>
#include <tuple>

namespace nlmc {

/// Execution policy for the data-parallel search kernels. The serial path is
/// the reference; both produce bit-identical results.
enum class Exec { serial, parallel };

namespace detail {

/// Best (mu_i, x) vs (mu_j, y) pair over a grid: value = tv(Q_i(x), Q_j(y)).
/// Ties resolve to the smallest (x, y, i, j).
struct AlphaHit {
  double value = -1.0;
  std::size_t x = 0, y = 0, i = 0, j = 0;
  auto key() const { return std::make_tuple(x, y, i, j); }
};

/// Best ratio tv(Q_i(x), Q_j(x)) / tv(mu_i, mu_j) over grid pairs whose law
/// distance is at least the floor. Ties resolve to the smallest (x, i, j).
struct LambdaHit {
  double value = -1.0;
  std::size_t x = 0, i = 0, j = 0;
  auto key() const { return std::make_tuple(x, i, j); }
};

inline bool better(const AlphaHit& a, const AlphaHit& b) {
  return a.value > b.value || (a.value == b.value && a.key() < b.key());
}
inline bool better(const LambdaHit& a, const LambdaHit& b) {
  return a.value > b.value || (a.value == b.value && a.key() < b.key());
}

/// `q` holds points * m * m kernel entries (row-major per point).
AlphaHit grid_alpha_max(std::span<const double> q, std::size_t points, std::size_t m, Exec exec);

/// `laws` holds points * m weights matching `q`.
LambdaHit grid_lambda_max(std::span<const double> q, std::span<const double> laws, std::size_t points,
                          std::size_t m, double pair_floor, Exec exec);

}  // namespace detail
}  // namespace nlmc
