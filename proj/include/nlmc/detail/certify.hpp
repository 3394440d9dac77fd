#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nlmc/detail/grid_search.hpp"
#include "nlmc/detail/simplex_cells.hpp"
#include "nlmc/kernels.hpp"

namespace nlmc::detail {

/// Shared inputs of the two certified maximisations. Both bound a function of
/// one law over every Kuhn cell by
///
///   max over cell vertices + (M / 2) * diam_L1(cell)^2,
///
/// which holds for any function whose second directional derivative along
/// unit zero-sum directions is at most M in magnitude (linear-interpolation
/// error on a simplex). Cells whose bound exceeds the acceptance threshold are
/// bisected along their longest edge.
struct CellSearch {
  const AffineKernel* kernel = nullptr;
  std::size_t steps = 2;
  std::span<const double> laws;  // lattice points * m
  const KuhnCells* cells = nullptr;
  double min_diameter = 1e-6;
  std::size_t eval_cap = 10'000'000;
  Exec exec = Exec::parallel;
};

struct CellStats {
  std::size_t evaluations = 0;  // new law evaluations inside cells
  std::size_t final_cells = 0;
  bool truncated = false;  // evaluation budget ran out; bounds remain valid
};

/// Ordering key for witnesses: grid points are (0, index), cell evaluations
/// are (root cell + 1, visit counter).
using WitnessKey = std::pair<std::size_t, std::size_t>;

/// Maxima of h_S(mu, x) = 2 Q_mu(x, S) - 1 = s . Q_mu(x) for every sign
/// pattern s (bit l set <=> s_l = +1), over laws mu and states x.
struct SignMaxima {
  std::vector<double> lower;              // best value found, per pattern
  std::vector<double> upper;              // certified bound, per pattern
  std::vector<std::vector<double>> law;   // witness law, per pattern
  std::vector<std::size_t> state;         // witness state, per pattern
  std::vector<WitnessKey> key;
  CellStats stats;
};

/// h values for every grid point: points * m * 2^m.
std::vector<double> sign_values(std::span<const double> q, std::size_t points, std::size_t m);

/// Lower ends only, from the grid.
SignMaxima grid_sign_maxima(std::span<const double> h, std::span<const double> laws, std::size_t points,
                            std::size_t m);

/// Certified upper ends. `curvature[x]` bounds |D^2 Q(x)[d, d]|; cells are
/// refined while some pattern's bound exceeds thresholds[pattern].
SignMaxima certify_sign_maxima(const CellSearch& search, std::span<const double> h_grid,
                               std::span<const double> curvature, std::span<const double> thresholds,
                               SignMaxima seed);

/// Maximum over laws xi, states x and directions (a, b) of
/// (1/2) || D Q_xi(x) (e_a - e_b) ||_1, the local law-Lipschitz constant.
struct DerivativeMax {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> law;
  std::size_t x = 0, a = 0, b = 1;
  WitnessKey key{0, 0};
  CellStats stats;
};

/// Directional derivative norms at every grid point: points * m * m(m-1)/2.
std::vector<double> derivative_values(const AffineKernel& k, std::size_t steps, std::span<const double> laws,
                                      std::size_t points, Exec exec);

DerivativeMax grid_derivative_max(std::span<const double> g, std::span<const double> laws, std::size_t points,
                                  std::size_t m);

DerivativeMax certify_derivative_max(const CellSearch& search, std::span<const double> g_grid,
                                     std::span<const double> mixed_curvature, double threshold,
                                     DerivativeMax seed);

}  // namespace nlmc::detail
