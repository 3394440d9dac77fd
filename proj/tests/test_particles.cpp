#include <gtest/gtest.h>

#include <cmath>

#include "nlmc/builtin.hpp"
#include "nlmc/dynamics.hpp"
#include "nlmc/errors.hpp"
#include "nlmc/particles.hpp"

namespace {

using nlmc::AffineKernel;
using nlmc::Distribution;
using nlmc::Matrix;

TEST(InitEnsemble, DegenerateLaw) {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto e = nlmc::init_ensemble(4, Distribution::vertex(4, 1), seed);
    for (auto s : e.states) EXPECT_EQ(s, 1u);
    EXPECT_EQ(e.empirical, Distribution::vertex(4, 1));
    EXPECT_EQ(e.time, 0u);
    EXPECT_EQ(e.rng_seed, seed);
  }
}

TEST(InitEnsemble, Deterministic) {
  const auto u = Distribution::uniform(4);
  const auto a = nlmc::init_ensemble(1000, u, 7), b = nlmc::init_ensemble(1000, u, 7);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, nlmc::init_ensemble(1000, u, 8).states);
  EXPECT_NE(a.states, nlmc::init_ensemble(1000, u, 7, 1).states);
}

TEST(InitEnsemble, RejectsZeroParticles) {
  EXPECT_THROW(nlmc::init_ensemble(0, Distribution::uniform(4), 1), nlmc::UsageError);
}

TEST(InitEnsemble, BinomialConfidence) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto e = nlmc::init_ensemble(100000, Distribution::uniform(4), seed);
    bool ok = true;
    for (double w : e.empirical.weights()) ok = ok && std::abs(w - 0.25) <= 0.01;
    good += ok;
  }
  EXPECT_GE(good, 95);
}

TEST(Advance, EmpiricalIsHistogram) {
  const auto k = nlmc::example2_kernel(0.4);
  auto e = nlmc::init_ensemble(5000, Distribution::uniform(4), 3);
  for (int t = 0; t < 5; ++t) {
    nlmc::advance(e, k);
    EXPECT_EQ(e.states.size(), 5000u);
    EXPECT_EQ(e.empirical, nlmc::histogram(e.states, 4));
  }
  EXPECT_EQ(e.time, 5u);
}

TEST(Advance, SingleParticleFollowsItsRow) {
  const auto k = nlmc::example2_kernel(0.4);
  // Reproduce the documented draw sequence: one uniform for the initial
  // state, one per step.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto e = nlmc::init_ensemble(1, Distribution::vertex(4, 0), seed);
    nlmc::advance(e, k);
    auto g = nlmc::make_engine(seed, 0);
    g();
    const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
    const auto row = nlmc::evaluate(k, Distribution::vertex(4, 0)).row(0);
    std::size_t expect = 0;
    double c = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (row[j] <= 0.0) continue;
      c += row[j];
      expect = j;
      if (u < c) break;
    }
    EXPECT_EQ(e.states[0], expect);
  }
  std::vector<double> freq(4, 0.0);
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    auto e = nlmc::init_ensemble(1, Distribution::vertex(4, 0), 1000 + s);
    nlmc::advance(e, k);
    freq[e.states[0]] += 1.0 / trials;
  }
  const std::vector<double> row{0.0, 0.4, 0.1, 0.5};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(freq[j], row[j], 0.015);
}

TEST(Advance, LawIndependentKernelMovesIndependently) {
  Matrix b(3);
  const double rows[3][3] = {{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}, {0.1, 0.1, 0.8}};
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t j = 0; j < 3; ++j) b(x, j) = rows[x][j];
  const AffineKernel k(3, b, {});
  const Distribution mu0({0.5, 0.3, 0.2});
  auto e = nlmc::init_ensemble(200000, mu0, 11);
  const auto start = e.empirical;
  nlmc::advance(e, k);
  for (std::size_t j = 0; j < 3; ++j) {
    double v = 0.0;
    for (std::size_t x = 0; x < 3; ++x) v += start[x] * rows[x][j];
    EXPECT_NEAR(e.empirical[j], v, 0.01);
  }
}

TEST(Advance, RejectsMismatchedKernel) {
  auto e = nlmc::init_ensemble(10, Distribution::uniform(3), 1);
  EXPECT_THROW(nlmc::advance(e, nlmc::example2_kernel(0.4)), nlmc::DimensionError);
}

TEST(Advance, ExampleTwoApproachesInvariantLaw) {
  const auto k = nlmc::example2_kernel(0.4);
  const Distribution pi({0.25, 0.3, 0.2, 0.25});
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto e = nlmc::init_ensemble(10000, Distribution::vertex(4, 0), seed);
    for (int t = 0; t < 30; ++t) nlmc::advance(e, k);
    good += nlmc::tv_distance(e.empirical, pi) <= 0.05;
  }
  EXPECT_GE(good, 18);
}

TEST(LawErrorCurve, DecreasesWithParticleCount) {
  const auto k = nlmc::example2_kernel(0.4);
  const auto rows = nlmc::law_error_curve(k, Distribution::vertex(4, 0), {100, 1000, 10000}, 30, 20, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].mean_tv, rows[1].mean_tv);
  EXPECT_GT(rows[1].mean_tv, rows[2].mean_tv);
  EXPECT_LE(rows[2].mean_tv, 0.05);
  for (const auto& r : rows) {
    EXPECT_EQ(r.steps, 30u);
    EXPECT_EQ(r.replicas, 20u);
    EXPECT_EQ(r.seed, 1u);
    EXPECT_GE(r.std_tv, 0.0);
  }
}

TEST(LawErrorCurve, Reproducible) {
  const auto k = nlmc::example1_kernel(0.2);
  const auto a = nlmc::law_error_curve(k, Distribution::uniform(4), {50, 500}, 10, 1, 42);
  const auto b = nlmc::law_error_curve(k, Distribution::uniform(4), {50, 500}, 10, 1, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_tv, b[i].mean_tv);
    EXPECT_EQ(a[i].std_tv, 0.0);
  }
}

TEST(LawErrorCurve, StepsZeroIsInitialSamplingError) {
  const auto k = nlmc::example2_kernel(0.4);
  const auto mu0 = Distribution::uniform(4);
  const auto rows = nlmc::law_error_curve(k, mu0, {300}, 0, 1, 5);
  // Replica 0 of row 0 uses stream 0.
  const auto e = nlmc::init_ensemble(300, mu0, 5, 0);
  EXPECT_EQ(rows[0].mean_tv, nlmc::tv_distance(e.empirical, mu0));
}

TEST(LawErrorCurve, Errors) {
  const auto k = nlmc::example2_kernel(0.4);
  const auto mu0 = Distribution::uniform(4);
  EXPECT_THROW(nlmc::law_error_curve(k, mu0, {10}, 5, 0, 1), nlmc::UsageError);
  EXPECT_THROW(nlmc::law_error_curve(k, mu0, {}, 5, 1, 1), nlmc::UsageError);
  EXPECT_THROW(nlmc::law_error_curve(k, mu0, {10, 0}, 5, 1, 1), nlmc::UsageError);
}

}  // namespace
