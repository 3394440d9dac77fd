#include "nlmc/detail/curvature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nlmc::detail {

std::vector<double> row_lambdas(const AffineKernel& k) {
  const std::size_t m = k.states();
  std::vector<double> lam(m, 0.0);
  if (k.law_independent()) return lam;
  std::vector<double> dense(m * m * m, 0.0);
  for (const auto& e : k.coeff()) dense[(e.from * m + e.to) * m + e.law] = e.value;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
          s += std::abs(dense[(x * m + j) * m + a] - dense[(x * m + j) * m + b]);
        lam[x] = std::max(lam[x], 0.5 * s);
      }
  return lam;
}

namespace {

// Bounds on L1 norms of the mixed partials d^i/dt^i d^j/ds^j of a vector along
// mu + t d + s e, for i <= 2 and j <= 1.
using Jet = std::array<std::array<double, 2>, 3>;

// Binomial coefficients for n <= 2.
constexpr double binom(int n, int k) { return (n == 2 && k == 1) ? 2.0 : 1.0; }

// Leibniz rule for (a * P_v) where P_v = B + C[v]: the (0,0) derivative of P is
// stochastic (norm-preserving) and every other derivative is C applied to a
// zero-sum vector, bounded through row lambdas. `weight` bounds
// sum_i |a_i| lambda(i) over the simplex.
Jet propagate(const Jet& a, double weight, const Jet& v, double lambda_max) {
  Jet out{};
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 1; ++j) {
      double n = a[i][j];
      for (int ii = 0; ii <= i; ++ii)
        for (int jj = 0; jj <= j; ++jj) {
          if (ii == i && jj == j) continue;
          const double w = (ii == 0 && jj == 0) ? weight : a[ii][jj] * lambda_max;
          n += binom(i, ii) * binom(j, jj) * w * v[i - ii][j - jj];
        }
      out[i][j] = n;
    }
  return out;
}

}  // namespace

CurvatureBounds curvature_bounds(const AffineKernel& k, std::size_t steps) {
  const std::size_t m = k.states();
  const auto lam = row_lambdas(k);
  const double lam_max = *std::max_element(lam.begin(), lam.end());

  // Exact sup over the simplex of sum_i P_mu(x, i) lambda(i); affine in mu,
  // so attained at a vertex.
  std::vector<double> next_weight(m, 0.0);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t v = 0; v < m; ++v) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += (k.base()(x, i) + k.coeff(x, i, v)) * lam[i];
      next_weight[x] = std::max(next_weight[x], s);
    }

  CurvatureBounds out;
  out.lipschitz.resize(m);
  out.curvature.resize(m);
  out.mixed_curvature.resize(m);
  for (std::size_t x = 0; x < m; ++x) {
    Jet law{};
    law[0][0] = 1.0;
    law[1][0] = 1.0;
    law[0][1] = 1.0;
    Jet row{};
    row[0][0] = 1.0;
    double row_weight = lam[x];
    for (std::size_t s = 0; s < steps; ++s) {
      const Jet next_row = propagate(row, row_weight, law, lam_max);
      law = propagate(law, lam_max, law, lam_max);
      row = next_row;
      row_weight = (s == 0) ? next_weight[x] : lam_max;
    }
    out.lipschitz[x] = row[1][0];
    out.curvature[x] = row[2][0];
    out.mixed_curvature[x] = row[2][1];
  }
  return out;
}

}  // namespace nlmc::detail
