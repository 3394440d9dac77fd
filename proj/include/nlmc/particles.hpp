#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "nlmc/kernels.hpp"
#include "nlmc/measures.hpp"

namespace nlmc {

/// N particles driven by their own empirical law.
///
/// Each ensemble owns a std::mt19937_64 seeded through
/// std::seed_seq{seed_lo, seed_hi, stream_lo, stream_hi}; replica r of a
/// master seed s uses stream r. Uniforms are (engine() >> 11) * 2^-53 and
/// particles draw in index order, so results are platform-stable.
struct ParticleEnsemble {
  std::vector<std::size_t> states;
  Distribution empirical = Distribution::vertex(1, 0);
  std::uint64_t rng_seed = 0;
  std::uint64_t stream = 0;
  std::size_t time = 0;
  std::mt19937_64 engine;
};

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream);

/// Normalised histogram of `states` over `size` labels.
Distribution histogram(const std::vector<std::size_t>& states, std::size_t size);

ParticleEnsemble init_ensemble(std::size_t n, const Distribution& mu0, std::uint64_t seed, std::uint64_t stream = 0);

/// Evaluates P at the current empirical law once, then moves every particle by
/// inverse-CDF sampling of its row.
void advance(ParticleEnsemble& e, const AffineKernel& k);

struct ErrorCurveRow {
  std::size_t n = 0;
  std::size_t steps = 0;
  double mean_tv = 0.0;
  double std_tv = 0.0;  // sample standard deviation (0 for one replica)
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
};

/// tv(empirical law after `steps`, exact mu_steps) over `replicas` ensembles
/// per particle count. Replica r of row i uses stream i * 2^32 + r.
std::vector<ErrorCurveRow> law_error_curve(const AffineKernel& k, const Distribution& mu0,
                                           const std::vector<std::size_t>& n_list, std::size_t steps,
                                           std::size_t replicas, std::uint64_t seed);

}  // namespace nlmc
