#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "nlmc/builtin.hpp"
#include "nlmc/contraction.hpp"
#include "nlmc/detail/curvature.hpp"
#include "nlmc/detail/grid_search.hpp"
#include "nlmc/errors.hpp"

namespace {

using nlmc::AffineKernel;
using nlmc::CoefficientReport;
using nlmc::Distribution;
using nlmc::Matrix;

Distribution random_law(std::mt19937_64& rng, std::size_t m) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& v : w) s += (v = ex(rng));
  for (auto& v : w) v /= s;
  return Distribution(w);
}

// Laws on the boundary too: each coordinate zeroed with probability 1/3.
Distribution random_law_with_faces(std::mt19937_64& rng, std::size_t m) {
  std::exponential_distribution<double> ex(1.0);
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& v : w) s += (v = coin(rng) == 0 ? 0.0 : ex(rng));
  if (s == 0.0) {
    w[0] = s = 1.0;
  }
  for (auto& v : w) v /= s;
  return Distribution(w);
}

double row_tv(const Matrix& a, std::size_t x, const Matrix& b, std::size_t y) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.n; ++j) s += std::abs(a(x, j) - b(y, j));
  return s;
}

AffineKernel constant_kernel(bool identical_rows) {
  Matrix b(3);
  const double rows[3][3] = {{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}, {0.1, 0.1, 0.8}};
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t j = 0; j < 3; ++j) b(x, j) = identical_rows ? rows[0][j] : rows[x][j];
  return AffineKernel(3, b, {});
}

// Two-step reports are shared across tests; computing them once keeps the
// suite fast.
const CoefficientReport& two_step_report(nlmc::BuiltinId id, double gamma) {
  static std::map<std::pair<int, double>, CoefficientReport> cache;
  const auto key = std::make_pair(static_cast<int>(id), gamma);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, nlmc::coefficients_k_step(nlmc::make_builtin(id, gamma), 2)).first;
  return it->second;
}

TEST(RegimeOf, Cases) {
  EXPECT_EQ(nlmc::regime_of(0.5, 0.2), nlmc::Regime::exponential);
  EXPECT_EQ(nlmc::regime_of(0.5, 0.5 + 1e-10), nlmc::Regime::linear);
  EXPECT_EQ(nlmc::regime_of(0.0, 0.4), nlmc::Regime::uncovered);
}

TEST(AlphaOneStep, Examples) {
  for (double g : {0.01, 0.1, 0.2, 0.24}) {
    const auto r = nlmc::alpha_one_step(nlmc::example1_kernel(g));
    EXPECT_NEAR(r.alpha, 0.004, 1e-15);
    EXPECT_EQ(r.certification, nlmc::Certification::exact);
  }
  for (double g : {0.1, 0.25, 0.4}) EXPECT_EQ(nlmc::alpha_one_step(nlmc::example2_kernel(g)).alpha, 0.0);
  EXPECT_EQ(nlmc::alpha_one_step(constant_kernel(true)).alpha, 1.0);
}

TEST(LambdaOneStep, Examples) {
  for (double g : {0.1, 0.25, 0.4}) EXPECT_NEAR(nlmc::lambda_one_step(nlmc::example2_kernel(g)).lambda, g, 1e-15);
  EXPECT_EQ(nlmc::lambda_one_step(constant_kernel(false)).lambda, 0.0);
  for (double g : {0.01, 0.1, 0.2}) {
    const auto r = nlmc::lambda_one_step(nlmc::example1_kernel(g));
    EXPECT_NEAR(r.lambda, 2 * g, 1e-15);
    EXPECT_NEAR(r.lambda_witness.ratio, 2 * g, 1e-15);
  }
}

TEST(OneStep, RejectsInvalidKernel) {
  Matrix b(2);
  b(0, 0) = 0.5;
  b(0, 1) = 0.6;
  b(1, 1) = 1.0;
  EXPECT_THROW(nlmc::alpha_one_step(AffineKernel(2, b, {})), nlmc::ValidationError);
  EXPECT_THROW(nlmc::lambda_one_step(AffineKernel(2, b, {})), nlmc::ValidationError);
}

TEST(LambdaOneStep, ExampleOneSampledOracle) {
  // Oracle: ratio sup over random pairs plus all vertex pairs.
  const double g = 0.2;
  const auto k = nlmc::example1_kernel(g);
  std::mt19937_64 rng(23);
  double best = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto mu = random_law_with_faces(rng, 4), nu = random_law_with_faces(rng, 4);
    const double d = nlmc::tv_distance(mu, nu);
    if (d < 1e-9) continue;
    const auto pm = nlmc::evaluate(k, mu).rows, pn = nlmc::evaluate(k, nu).rows;
    for (std::size_t x = 0; x < 4; ++x) best = std::max(best, row_tv(pm, x, pn, x) / d);
  }
  double vertex_best = 0.0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == b) continue;
      const auto pa = nlmc::evaluate(k, Distribution::vertex(4, a)).rows;
      const auto pb = nlmc::evaluate(k, Distribution::vertex(4, b)).rows;
      for (std::size_t x = 0; x < 4; ++x) vertex_best = std::max(vertex_best, row_tv(pa, x, pb, x) / 2.0);
    }
  EXPECT_LE(best, 2 * g + 1e-12);
  EXPECT_NEAR(vertex_best, 2 * g, 1e-12);
  EXPECT_NEAR(nlmc::lambda_one_step(k).lambda, vertex_best, 1e-12);
}

TEST(OneStep, SamplingNeverBeatsVertexEnumeration) {
  std::mt19937_64 rng(29);
  for (const auto& k : {nlmc::example1_kernel(0.2), nlmc::example2_kernel(0.4), nlmc::example2_kernel(0.1)}) {
    const auto r = nlmc::coefficients_one_step(k);
    double worst_tv = 0.0, worst_ratio = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const auto mu = random_law_with_faces(rng, 4), nu = random_law_with_faces(rng, 4);
      const auto pm = nlmc::evaluate(k, mu).rows, pn = nlmc::evaluate(k, nu).rows;
      const double d = nlmc::tv_distance(mu, nu);
      for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) worst_tv = std::max(worst_tv, row_tv(pm, x, pn, y));
        if (d > 1e-9) worst_ratio = std::max(worst_ratio, row_tv(pm, x, pn, x) / d);
      }
    }
    EXPECT_LE(worst_tv, 2 * (1 - r.alpha) + 1e-12);
    EXPECT_LE(worst_ratio, r.lambda + 1e-12);
  }
}

TEST(KStep, StepsOneDelegatesToExact) {
  const auto k = nlmc::example2_kernel(0.4);
  const auto r = nlmc::coefficients_k_step(k, 1);
  const auto e = nlmc::coefficients_one_step(k);
  EXPECT_EQ(r.certification, nlmc::Certification::exact);
  EXPECT_EQ(r.alpha, e.alpha);
  EXPECT_EQ(r.lambda, e.lambda);
}

TEST(KStep, Errors) {
  const auto k = nlmc::example2_kernel(0.4);
  EXPECT_THROW(nlmc::coefficients_k_step(k, 0), nlmc::UsageError);
  nlmc::SearchConfig cfg;
  cfg.eval_cap = 1000;
  EXPECT_THROW(nlmc::coefficients_k_step(k, 2, cfg), nlmc::CapError);
  cfg = {};
  cfg.denominator = 0;
  EXPECT_THROW(nlmc::coefficients_k_step(k, 2, cfg), nlmc::UsageError);
}

TEST(TwoStep, ExampleTwoBrackets) {
  const auto& r = two_step_report(nlmc::BuiltinId::example2, 0.4);
  EXPECT_EQ(r.certification, nlmc::Certification::bracketed);
  EXPECT_FALSE(r.stats.truncated);
  EXPECT_TRUE(r.lambda_bracket.contains(0.2)) << r.lambda_bracket.lower << " " << r.lambda_bracket.upper;
  EXPECT_LE(r.lambda_bracket.width(), 1e-3);
  EXPECT_TRUE(r.alpha_bracket.contains(0.5)) << r.alpha_bracket.lower << " " << r.alpha_bracket.upper;
  EXPECT_LE(r.alpha_bracket.width(), 1e-3);
  const std::set<std::size_t> pair{r.alpha_witness.x, r.alpha_witness.y};
  EXPECT_EQ(pair, (std::set<std::size_t>{2, 3}));
  EXPECT_LE(r.alpha_bracket.lower, r.alpha);
  EXPECT_LE(r.alpha, r.alpha_bracket.upper);
}

TEST(TwoStep, ExampleOneNearPublishedValues) {
  const double g = 0.004;
  const auto& r = two_step_report(nlmc::BuiltinId::example1, g);
  EXPECT_NEAR(r.alpha, 0.503992, 5e-3);
  EXPECT_LE(r.lambda, g + 1e-3);
  EXPECT_LE(r.alpha_bracket.width(), 1e-3);
}

TEST(TwoStep, WitnessesRealiseTheirValues) {
  for (auto [id, g] : {std::pair{nlmc::BuiltinId::example2, 0.4}, std::pair{nlmc::BuiltinId::example1, 0.2}}) {
    const auto k = nlmc::make_builtin(id, g);
    const auto& r = two_step_report(id, g);
    const auto& a = r.alpha_witness;
    const double d = row_tv(nlmc::two_step(k, a.mu).rows, a.x, nlmc::two_step(k, a.nu).rows, a.y);
    EXPECT_NEAR(d, a.distance, 1e-12);
    EXPECT_NEAR(1 - d / 2, r.alpha, 1e-12);
    const auto& l = r.lambda_witness;
    const double ratio =
        row_tv(nlmc::two_step(k, l.mu).rows, l.x, nlmc::two_step(k, l.nu).rows, l.x) / nlmc::tv_distance(l.mu, l.nu);
    EXPECT_NEAR(ratio, l.ratio, 1e-6);
    EXPECT_LE(ratio, r.lambda_bracket.upper + 1e-9);
  }
}

TEST(TwoStep, DominanceOnRandomSamples) {
  std::mt19937_64 rng(31);
  for (auto [id, g] : {std::pair{nlmc::BuiltinId::example2, 0.4}, std::pair{nlmc::BuiltinId::example1, 0.2},
                       std::pair{nlmc::BuiltinId::example1, 0.004}}) {
    const auto k = nlmc::make_builtin(id, g);
    const auto& r2 = two_step_report(id, g);
    const auto r1 = nlmc::coefficients_one_step(k);
    for (int i = 0; i < 10000; ++i) {
      const auto mu = random_law_with_faces(rng, 4);
      const auto nu = (i % 2 == 0) ? random_law_with_faces(rng, 4) : [&] {
        // Nearby pair to probe the infinitesimal ratio.
        auto w = mu.vector();
        std::uniform_int_distribution<std::size_t> pick(0, 3);
        const std::size_t a = pick(rng), b = (a + 1 + pick(rng) % 3) % 4;
        const double t = std::min(w[a], 1e-4);
        w[a] -= t;
        w[b] += t;
        return Distribution(w);
      }();
      std::uniform_int_distribution<std::size_t> st(0, 3);
      const std::size_t x = st(rng), y = st(rng);
      const double d = nlmc::tv_distance(mu, nu);
      const auto pm = nlmc::evaluate(k, mu).rows, pn = nlmc::evaluate(k, nu).rows;
      const auto qm = nlmc::two_step(k, mu).rows, qn = nlmc::two_step(k, nu).rows;
      EXPECT_LE(row_tv(pm, x, pn, y), 2 * (1 - r1.alpha_bracket.lower) + 1e-9);
      EXPECT_LE(row_tv(qm, x, qn, y), 2 * (1 - r2.alpha_bracket.lower) + 1e-9);
      if (d >= 1e-6) {
        EXPECT_LE(row_tv(pm, x, pn, x), r1.lambda_bracket.upper * d + 1e-9);
        EXPECT_LE(row_tv(qm, x, qn, x), r2.lambda_bracket.upper * d + 1e-9);
      }
    }
  }
}

TEST(TwoStep, BracketsTightenWithTheGrid) {
  const auto k = nlmc::example2_kernel(0.4);
  std::vector<CoefficientReport> reports;
  for (std::size_t d : {5, 10, 20}) {
    nlmc::SearchConfig cfg;
    cfg.denominator = d;
    reports.push_back(nlmc::coefficients_k_step(k, 2, cfg));
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    // alpha is 1 - sup/2: the found sup grows, so alpha's upper end shrinks.
    EXPECT_LE(reports[i].alpha_bracket.upper, reports[i - 1].alpha_bracket.upper);
    EXPECT_GE(reports[i].lambda_bracket.lower, reports[i - 1].lambda_bracket.lower);
  }
  for (const auto& r : reports) {
    EXPECT_TRUE(r.alpha_bracket.contains(0.5));
    EXPECT_TRUE(r.lambda_bracket.contains(0.2));
  }
}

TEST(TwoStep, SerialAndParallelAgree) {
  for (auto [id, g] : {std::pair{nlmc::BuiltinId::example2, 0.4}, std::pair{nlmc::BuiltinId::example1, 0.2}}) {
    const auto k = nlmc::make_builtin(id, g);
    nlmc::SearchConfig cfg;
    cfg.denominator = 10;
    cfg.exec = nlmc::Exec::serial;
    const auto s = nlmc::coefficients_k_step(k, 2, cfg);
    cfg.exec = nlmc::Exec::parallel;
    const auto p = nlmc::coefficients_k_step(k, 2, cfg);
    EXPECT_EQ(s.alpha_bracket.lower, p.alpha_bracket.lower);
    EXPECT_EQ(s.alpha_bracket.upper, p.alpha_bracket.upper);
    EXPECT_EQ(s.lambda_bracket.lower, p.lambda_bracket.lower);
    EXPECT_EQ(s.lambda_bracket.upper, p.lambda_bracket.upper);
    EXPECT_EQ(s.alpha_witness.mu, p.alpha_witness.mu);
    EXPECT_EQ(s.alpha_witness.x, p.alpha_witness.x);
    EXPECT_EQ(s.lambda_witness.mu, p.lambda_witness.mu);
    EXPECT_EQ(s.stats.cell_evaluations, p.stats.cell_evaluations);
  }
}

TEST(GridSearch, SerialAndParallelAgree) {
  const auto k = nlmc::example1_kernel(0.2);
  const auto grid = nlmc::simplex_grid(k.space(), 12);
  std::vector<double> laws, q;
  Matrix scratch;
  for (const auto& mu : grid) {
    laws.insert(laws.end(), mu.vector().begin(), mu.vector().end());
    nlmc::k_step_into(k, mu.weights(), 2, scratch);
    q.insert(q.end(), scratch.a.begin(), scratch.a.end());
  }
  const auto as = nlmc::detail::grid_alpha_max(q, grid.size(), 4, nlmc::Exec::serial);
  const auto ap = nlmc::detail::grid_alpha_max(q, grid.size(), 4, nlmc::Exec::parallel);
  EXPECT_EQ(as.value, ap.value);
  EXPECT_EQ(as.key(), ap.key());
  const auto ls = nlmc::detail::grid_lambda_max(q, laws, grid.size(), 4, 1e-9, nlmc::Exec::serial);
  const auto lp = nlmc::detail::grid_lambda_max(q, laws, grid.size(), 4, 1e-9, nlmc::Exec::parallel);
  EXPECT_EQ(ls.value, lp.value);
  EXPECT_EQ(ls.key(), lp.key());
}

// Derivative bounds used by the certification, checked against observed
// slopes and finite-difference curvatures.
TEST(CurvatureBounds, DominateObservedDerivatives) {
  std::mt19937_64 rng(37);
  for (const auto& k : {nlmc::example1_kernel(0.2), nlmc::example2_kernel(0.4), nlmc::example2_kernel(0.1)})
    for (std::size_t steps = 1; steps <= 3; ++steps) {
      const auto b = nlmc::detail::curvature_bounds(k, steps);
      for (int i = 0; i < 1000; ++i) {
        const auto mu = random_law(rng, 4), nu = random_law(rng, 4);
        Matrix qm, qn;
        nlmc::k_step_into(k, mu.weights(), steps, qm);
        nlmc::k_step_into(k, nu.weights(), steps, qn);
        const double d = nlmc::tv_distance(mu, nu);
        for (std::size_t x = 0; x < 4; ++x) EXPECT_LE(row_tv(qm, x, qn, x), b.lipschitz[x] * d + 1e-12);

        // Second and third derivatives along unit zero-sum directions, by
        // central differences of the exact Jacobian.
        std::vector<double> dir(4), e(4);
        for (std::size_t l = 0; l < 4; ++l) {
          dir[l] = mu[l] - nu[l];
          e[l] = nu[l] - 0.25;
        }
        auto normalise = [](std::vector<double>& v) {
          double s = 0.0;
          for (double w : v) s += std::abs(w);
          if (s > 0)
            for (double& w : v) w /= s;
        };
        normalise(dir);
        normalise(e);
        const double t = 1e-4;
        std::vector<double> lo = mu.vector(), hi = mu.vector();
        for (std::size_t l = 0; l < 4; ++l) {
          lo[l] -= t * dir[l];
          hi[l] += t * dir[l];
        }
        std::vector<double> jl, jm, jh;
        nlmc::k_step_jacobian(k, lo, steps, jl);
        nlmc::k_step_jacobian(k, mu.weights(), steps, jm);
        nlmc::k_step_jacobian(k, hi, steps, jh);
        for (std::size_t x = 0; x < 4; ++x) {
          double second = 0.0, third = 0.0;
          for (std::size_t j = 0; j < 4; ++j) {
            double dh = 0.0, dl = 0.0, ehh = 0.0, em = 0.0, el = 0.0;
            for (std::size_t l = 0; l < 4; ++l) {
              const std::size_t idx = (x * 4 + j) * 4 + l;
              dh += jh[idx] * dir[l];
              dl += jl[idx] * dir[l];
              ehh += jh[idx] * e[l];
              em += jm[idx] * e[l];
              el += jl[idx] * e[l];
            }
            second += std::abs((dh - dl) / (2 * t));
            third += std::abs((ehh - 2 * em + el) / (t * t));
          }
          EXPECT_LE(second, b.curvature[x] + 1e-6);
          EXPECT_LE(third, b.mixed_curvature[x] + 1e-3);
        }
      }
    }
}

TEST(Classify, ExampleTwo) {
  const auto k = nlmc::example2_kernel(0.4);
  const auto s = nlmc::classify(nlmc::coefficients_one_step(k), two_step_report(nlmc::BuiltinId::example2, 0.4));
  EXPECT_EQ(s.one_step.certified, nlmc::Regime::uncovered);
  EXPECT_EQ(s.multi_step.certified, nlmc::Regime::exponential);
  EXPECT_EQ(s.conclusion, "two-step exponential");
}

TEST(Classify, ExampleOne) {
  const auto k = nlmc::example1_kernel(0.2);
  const auto s = nlmc::classify(nlmc::coefficients_one_step(k), two_step_report(nlmc::BuiltinId::example1, 0.2));
  EXPECT_EQ(s.multi_step.certified, nlmc::Regime::exponential);
  EXPECT_TRUE(s.multi_step.guaranteed);
}

TEST(Classify, LawIndependentKernel) {
  const auto k = constant_kernel(false);
  nlmc::SearchConfig cfg;
  cfg.denominator = 6;
  const auto s = nlmc::classify(nlmc::coefficients_one_step(k), nlmc::coefficients_k_step(k, 2, cfg));
  EXPECT_EQ(s.one_step.certified, nlmc::Regime::exponential);
  EXPECT_EQ(s.multi_step.certified, nlmc::Regime::exponential);
  EXPECT_EQ(s.conclusion, "one-step exponential");
}

TEST(Classify, RejectsMismatchedKernels) {
  const auto r1 = nlmc::coefficients_one_step(nlmc::example2_kernel(0.3));
  EXPECT_THROW(nlmc::classify(r1, two_step_report(nlmc::BuiltinId::example2, 0.4)), nlmc::UsageError);
  EXPECT_THROW(nlmc::classify(two_step_report(nlmc::BuiltinId::example2, 0.4), r1), nlmc::UsageError);
}

}  // namespace
