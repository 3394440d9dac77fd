#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nlmc {

/// Finite state space {0, ..., size-1}. Files and reports use 1-based labels.
class StateSpace {
 public:
  explicit StateSpace(std::size_t size);
  std::size_t size() const noexcept { return size_; }
  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::size_t size_;
};

/// Weights below -kHardTolerance or a mass off by more than kHardTolerance
/// are rejected; drift up to that is repaired.
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHardTolerance = 1e-6;

/// Probability vector on a finite state space.
///
/// Construction enforces nonnegativity and unit mass. Rounding noise is
/// absorbed: negative weights above -1e-6 are clamped to zero and the vector
/// is rescaled only when its mass drifts from 1 by more than 1e-12.
class Distribution {
 public:
  explicit Distribution(std::vector<double> weights);

  static Distribution vertex(std::size_t size, std::size_t state);
  static Distribution uniform(std::size_t size);

  std::size_t size() const noexcept { return weights_.size(); }
  StateSpace space() const { return StateSpace(weights_.size()); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<double>& vector() const noexcept { return weights_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> weights_;
};

/// Total variation distance in the factor-2 convention: sum_i |a_i - b_i|,
/// which lies in [0, 2].
double tv_distance(const Distribution& a, const Distribution& b);

/// Same quantity on raw weight vectors (hot loops); sizes must match.
double tv_distance(std::span<const double> a, std::span<const double> b);

/// Coordinate-wise minimum of two laws. Its mass is 1 - tv(a, b) / 2.
struct SubProbability {
  std::vector<double> weights;
  double mass() const;
};

SubProbability meet_measure(const Distribution& a, const Distribution& b);

inline constexpr std::size_t kDefaultGridCap = 10'000'000;

/// Number of lattice points with denominator `denominator` on the simplex of
/// dimension size-1, i.e. C(denominator + size - 1, size - 1). Saturates at
/// SIZE_MAX instead of overflowing.
std::size_t simplex_grid_count(const StateSpace& space, std::size_t denominator);

/// Integer count vectors summing to `denominator`, lexicographic with the
/// largest first coordinate first.
std::vector<std::vector<int>> simplex_lattice(const StateSpace& space, std::size_t denominator,
                                              std::size_t cap = kDefaultGridCap);

/// All laws whose weights are multiples of 1/denominator, in lattice order.
std::vector<Distribution> simplex_grid(const StateSpace& space, std::size_t denominator,
                                       std::size_t cap = kDefaultGridCap);

}  // namespace nlmc
