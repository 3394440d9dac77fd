#include "nlmc/measures.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nlmc/errors.hpp"

namespace nlmc {

StateSpace::StateSpace(std::size_t size) : size_(size) {
  if (size == 0) throw DimensionError("state space must have at least one state");
}

Distribution::Distribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DimensionError("distribution over an empty state space");
  double mass = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    double& w = weights_[i];
    if (!std::isfinite(w)) throw DistributionError("non-finite weight at state " + std::to_string(i + 1));
    if (w < -kHardTolerance)
      throw DistributionError("negative weight " + std::to_string(w) + " at state " + std::to_string(i + 1));
    if (w < 0.0) w = 0.0;
    mass += w;
  }
  if (std::abs(mass - 1.0) > kHardTolerance)
    throw DistributionError("weights sum to " + std::to_string(mass) + ", not 1");
  if (std::abs(mass - 1.0) > kNormTolerance)
    for (double& w : weights_) w /= mass;
}

Distribution Distribution::vertex(std::size_t size, std::size_t state) {
  if (state >= size) throw DimensionError("vertex index out of range");
  std::vector<double> w(size, 0.0);
  w[state] = 1.0;
  return Distribution(std::move(w));
}

Distribution Distribution::uniform(std::size_t size) {
  StateSpace space(size);
  return Distribution(std::vector<double>(space.size(), 1.0 / static_cast<double>(size)));
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("tv_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double tv_distance(const Distribution& a, const Distribution& b) {
  return tv_distance(a.weights(), b.weights());
}

double SubProbability::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

SubProbability meet_measure(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) throw DimensionError("meet_measure: dimension mismatch");
  SubProbability eta{std::vector<double>(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) eta.weights[i] = std::min(a[i], b[i]);
  return eta;
}

std::size_t simplex_grid_count(const StateSpace& space, std::size_t denominator) {
  // C(n + k, k) built incrementally; every partial product is itself a binomial.
  const std::size_t k = space.size() - 1;
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t factor = denominator + i;
    if (result > std::numeric_limits<std::size_t>::max() / factor)
      return std::numeric_limits<std::size_t>::max();
    result = result * factor / i;
  }
  return result;
}

namespace {

void enumerate_lattice(std::vector<int>& current, std::size_t pos, int remaining,
                       std::vector<std::vector<int>>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[pos] = v;
    enumerate_lattice(current, pos + 1, remaining - v, out);
  }
}

}  // namespace

std::vector<std::vector<int>> simplex_lattice(const StateSpace& space, std::size_t denominator,
                                              std::size_t cap) {
  if (denominator == 0) throw UsageError("grid denominator must be at least 1");
  const std::size_t count = simplex_grid_count(space, denominator);
  if (count > cap)
    throw CapError("simplex grid with denominator " + std::to_string(denominator) + " has " +
                       std::to_string(count) + " points",
                   cap);
  std::vector<std::vector<int>> out;
  out.reserve(count);
  std::vector<int> current(space.size(), 0);
  enumerate_lattice(current, 0, static_cast<int>(denominator), out);
  return out;
}

std::vector<Distribution> simplex_grid(const StateSpace& space, std::size_t denominator, std::size_t cap) {
  const auto lattice = simplex_lattice(space, denominator, cap);
  std::vector<Distribution> grid;
  grid.reserve(lattice.size());
  const double scale = 1.0 / static_cast<double>(denominator);
  for (const auto& counts : lattice) {
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) w[i] = counts[i] * scale;
    grid.emplace_back(std::move(w));
  }
  return grid;
}

}  // namespace nlmc
