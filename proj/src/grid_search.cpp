#include "nlmc/detail/grid_search.hpp"

#include <cmath>

namespace nlmc::detail {

namespace {

inline double l1(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t l = 0; l < m; ++l) s += std::abs(a[l] - b[l]);
  return s;
}

void alpha_rows(std::span<const double> q, std::size_t points, std::size_t m, std::size_t i, AlphaHit& best) {
  const std::size_t stride = m * m;
  const double* qi = q.data() + i * stride;
  for (std::size_t j = 0; j < points; ++j) {
    const double* qj = q.data() + j * stride;
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < m; ++y) {
        AlphaHit hit{l1(qi + x * m, qj + y * m, m), x, y, i, j};
        if (better(hit, best)) best = hit;
      }
  }
}

void lambda_rows(std::span<const double> q, std::span<const double> laws, std::size_t points, std::size_t m,
                 double pair_floor, std::size_t i, LambdaHit& best) {
  const std::size_t stride = m * m;
  const double* qi = q.data() + i * stride;
  for (std::size_t j = 0; j < points; ++j) {
    if (j == i) continue;
    const double d = l1(laws.data() + i * m, laws.data() + j * m, m);
    if (d < pair_floor) continue;
    const double* qj = q.data() + j * stride;
    for (std::size_t x = 0; x < m; ++x) {
      LambdaHit hit{l1(qi + x * m, qj + x * m, m) / d, x, i, j};
      if (better(hit, best)) best = hit;
    }
  }
}

}  // namespace

AlphaHit grid_alpha_max(std::span<const double> q, std::size_t points, std::size_t m, Exec exec) {
  AlphaHit best;
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < points; ++i) alpha_rows(q, points, m, i, best);
    return best;
  }
#pragma omp parallel
  {
    AlphaHit local;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::size_t i = 0; i < points; ++i) alpha_rows(q, points, m, i, local);
#pragma omp critical(nlmc_alpha_reduce)
    if (better(local, best)) best = local;
  }
  return best;
}

LambdaHit grid_lambda_max(std::span<const double> q, std::span<const double> laws, std::size_t points,
                          std::size_t m, double pair_floor, Exec exec) {
  LambdaHit best;
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < points; ++i) lambda_rows(q, laws, points, m, pair_floor, i, best);
    return best;
  }
#pragma omp parallel
  {
    LambdaHit local;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::size_t i = 0; i < points; ++i) lambda_rows(q, laws, points, m, pair_floor, i, local);
#pragma omp critical(nlmc_lambda_reduce)
    if (better(local, best)) best = local;
  }
  return best;
}

}  // namespace nlmc::detail
