#include "nlmc/particles.hpp"

#include <cmath>
#include <exception>

#include "nlmc/dynamics.hpp"
#include "nlmc/errors.hpp"

namespace nlmc {

namespace {

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::size_t sample_row(std::span<const double> row, double u) {
  double c = 0.0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    c += row[j];
    last = j;
    if (u < c) return j;
  }
  return last;
}

}  // namespace

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Distribution histogram(const std::vector<std::size_t>& states, std::size_t size) {
  std::vector<double> w(size, 0.0);
  for (std::size_t s : states) ++w[s];
  const double inv = 1.0 / static_cast<double>(states.size());
  for (double& v : w) v *= inv;
  return Distribution(std::move(w));
}

ParticleEnsemble init_ensemble(std::size_t n, const Distribution& mu0, std::uint64_t seed, std::uint64_t stream) {
  if (n == 0) throw UsageError("particle count must be at least 1");
  ParticleEnsemble e;
  e.rng_seed = seed;
  e.stream = stream;
  e.engine = make_engine(seed, stream);
  e.states.resize(n);
  for (std::size_t i = 0; i < n; ++i) e.states[i] = sample_row(mu0.weights(), uniform01(e.engine));
  e.empirical = histogram(e.states, mu0.size());
  return e;
}

void advance(ParticleEnsemble& e, const AffineKernel& k) {
  require_valid(k);
  const std::size_t m = k.states();
  if (e.empirical.size() != m) throw DimensionError("ensemble does not match the kernel's state space");
  Matrix p;
  k.evaluate_into(e.empirical.weights(), p);
  for (auto& s : e.states) s = sample_row(p.row(s), uniform01(e.engine));
  e.empirical = histogram(e.states, m);
  ++e.time;
}

std::vector<ErrorCurveRow> law_error_curve(const AffineKernel& k, const Distribution& mu0,
                                           const std::vector<std::size_t>& n_list, std::size_t steps,
                                           std::size_t replicas, std::uint64_t seed) {
  require_valid(k);
  if (replicas == 0) throw UsageError("replica count must be at least 1");
  if (n_list.empty()) throw UsageError("at least one particle count is required");
  for (std::size_t n : n_list)
    if (n == 0) throw UsageError("particle count must be at least 1");
  const Distribution exact = iterate(k, mu0, steps).laws.back();

  std::vector<ErrorCurveRow> out;
  for (std::size_t row = 0; row < n_list.size(); ++row) {
    const std::size_t n = n_list[row];
    std::vector<double> errors(replicas, 0.0);
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(replicas);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < count; ++r) {
      try {
        auto e = init_ensemble(n, mu0, seed, (static_cast<std::uint64_t>(row) << 32) + static_cast<std::uint64_t>(r));
        for (std::size_t t = 0; t < steps; ++t) advance(e, k);
        errors[r] = tv_distance(e.empirical, exact);
      } catch (...) {
#pragma omp critical(nlmc_particles_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    double mean = 0.0;
    for (double v : errors) mean += v;
    mean /= static_cast<double>(replicas);
    double var = 0.0;
    for (double v : errors) var += (v - mean) * (v - mean);
    const double sd = replicas > 1 ? std::sqrt(var / static_cast<double>(replicas - 1)) : 0.0;
    out.push_back({n, steps, mean, sd, replicas, seed});
  }
  return out;
}

}  // namespace nlmc
