#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "nlmc/detail/simplex_cells.hpp"
#include "nlmc/errors.hpp"
#include "nlmc/measures.hpp"

namespace {

using nlmc::Distribution;

Distribution random_law(std::mt19937_64& rng, std::size_t m) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& v : w) s += (v = ex(rng));
  for (auto& v : w) v /= s;
  return Distribution(w);
}

// Pascal-triangle binomial, independent of the library's count.
std::size_t pascal(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> t(n + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) {
    t[i][0] = 1;
    for (std::size_t j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + (j < i ? t[i - 1][j] : 0);
  }
  return t[n][k];
}

TEST(StateSpace, RejectsEmpty) {
  EXPECT_THROW(nlmc::StateSpace(0), nlmc::Error);
  EXPECT_EQ(nlmc::StateSpace(4).size(), 4u);
}

TEST(Distribution, RejectsNegativeAndOffMass) {
  EXPECT_THROW(Distribution({0.5, 0.6, -0.1}), nlmc::DistributionError);
  EXPECT_THROW(Distribution({0.5, 0.4}), nlmc::DistributionError);
  EXPECT_THROW(Distribution(std::vector<double>{}), nlmc::Error);
}

TEST(Distribution, AbsorbsRoundingNoise) {
  const Distribution d({0.5 + 1e-13, 0.5, -1e-14});
  EXPECT_GE(d[2], 0.0);
  double s = 0.0;
  for (double v : d.weights()) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Distribution, VertexAndUniform) {
  const auto e = Distribution::vertex(3, 1);
  EXPECT_EQ(e[1], 1.0);
  EXPECT_EQ(e[0], 0.0);
  const auto u = Distribution::uniform(4);
  for (double v : u.weights()) EXPECT_EQ(v, 0.25);
}

TEST(TvDistance, Examples) {
  EXPECT_EQ(nlmc::tv_distance(Distribution::vertex(4, 0), Distribution::vertex(4, 0)), 0.0);
  EXPECT_EQ(nlmc::tv_distance(Distribution::vertex(4, 0), Distribution::vertex(4, 1)), 2.0);
  EXPECT_NEAR(nlmc::tv_distance(Distribution({0.6, 0.4}), Distribution({0.3, 0.7})), 0.6, 1e-15);
}

TEST(TvDistance, DimensionMismatch) {
  EXPECT_THROW(nlmc::tv_distance(Distribution::vertex(3, 0), Distribution::vertex(4, 0)), nlmc::DimensionError);
  EXPECT_THROW(nlmc::meet_measure(Distribution::vertex(3, 0), Distribution::vertex(4, 0)), nlmc::DimensionError);
}

TEST(MeetMeasure, Examples) {
  const auto m = nlmc::meet_measure(Distribution({0.6, 0.4}), Distribution({0.3, 0.7}));
  EXPECT_NEAR(m.weights[0], 0.3, 1e-15);
  EXPECT_NEAR(m.weights[1], 0.4, 1e-15);
  EXPECT_NEAR(m.mass(), 0.7, 1e-15);
  EXPECT_EQ(nlmc::meet_measure(Distribution::vertex(3, 0), Distribution::vertex(3, 0)).mass(), 1.0);
  EXPECT_EQ(nlmc::meet_measure(Distribution::vertex(3, 0), Distribution::vertex(3, 1)).mass(), 0.0);
}

TEST(TvDistance, MetricPropertiesOnRandomLaws) {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 2000; ++it) {
    const std::size_t m = 2 + it % 6;
    const auto a = random_law(rng, m), b = random_law(rng, m), c = random_law(rng, m);
    const double ab = nlmc::tv_distance(a, b);
    EXPECT_EQ(ab, nlmc::tv_distance(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 2.0);
    EXPECT_LE(nlmc::tv_distance(a, c), ab + nlmc::tv_distance(b, c) + 1e-15);
    EXPECT_NEAR(ab, 2.0 * (1.0 - nlmc::meet_measure(a, b).mass()), 1e-12);
  }
}

TEST(SimplexGrid, SmallExamples) {
  const auto g = nlmc::simplex_grid(nlmc::StateSpace(2), 2);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], Distribution({1.0, 0.0}));
  EXPECT_EQ(g[1], Distribution({0.5, 0.5}));
  EXPECT_EQ(g[2], Distribution({0.0, 1.0}));
  const auto v = nlmc::simplex_grid(nlmc::StateSpace(3), 1);
  ASSERT_EQ(v.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(v[k], Distribution::vertex(3, k));
}

TEST(SimplexGrid, CountsMatchBinomial) {
  EXPECT_EQ(nlmc::simplex_grid(nlmc::StateSpace(4), 20).size(), 1771u);
  EXPECT_EQ(pascal(23, 3), 1771u);
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t d = 1; d <= 9; ++d) {
      EXPECT_EQ(nlmc::simplex_grid_count(nlmc::StateSpace(m), d), pascal(d + m - 1, m - 1));
      EXPECT_EQ(nlmc::simplex_lattice(nlmc::StateSpace(m), d).size(), pascal(d + m - 1, m - 1));
    }
}

TEST(SimplexGrid, EveryPointValidVerticesPresentAndOrdered) {
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t d = 1; d <= 7; ++d) {
      const auto lattice = nlmc::simplex_lattice(nlmc::StateSpace(m), d);
      EXPECT_TRUE(std::is_sorted(lattice.begin(), lattice.end(), std::greater<>()));
      const auto grid = nlmc::simplex_grid(nlmc::StateSpace(m), d);
      std::set<std::vector<double>> seen;
      for (const auto& p : grid) {
        double s = 0.0;
        for (double w : p.weights()) {
          EXPECT_GE(w, 0.0);
          s += w;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
        seen.insert(p.vector());
      }
      EXPECT_EQ(seen.size(), grid.size());
      for (std::size_t k = 0; k < m; ++k) EXPECT_TRUE(seen.count(Distribution::vertex(m, k).vector()));
    }
}

TEST(SimplexGrid, ZeroDenominatorAndCap) {
  EXPECT_THROW(nlmc::simplex_grid(nlmc::StateSpace(3), 0), nlmc::UsageError);
  try {
    nlmc::simplex_grid(nlmc::StateSpace(4), 20, 1000);
    FAIL() << "expected CapError";
  } catch (const nlmc::CapError& e) {
    EXPECT_EQ(e.cap(), 1000u);
    EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
  }
}

TEST(KuhnCells, CountAndEdgeLengths) {
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t d = 1; d <= 6; ++d) {
      const auto lattice = nlmc::simplex_lattice(nlmc::StateSpace(m), d);
      const auto cells = nlmc::detail::kuhn_cells(lattice, d);
      EXPECT_EQ(cells.size(), static_cast<std::size_t>(std::pow(d, m - 1))) << m << " " << d;
      if (m == 1) continue;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto* ids = cells.cell(c);
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = a + 1; b < m; ++b) {
            // Consecutive Kuhn vertices differ by a unit transfer (L1 length
            // 2); any two differ by at most b - a transfers.
            int l1 = 0;
            for (std::size_t l = 0; l < m; ++l) l1 += std::abs(lattice[ids[a]][l] - lattice[ids[b]][l]);
            if (b == a + 1) {
              EXPECT_EQ(l1, 2);
            }
            EXPECT_EQ(l1 % 2, 0);
            EXPECT_GE(l1, 2);
            EXPECT_LE(l1, static_cast<int>(2 * (b - a)));
          }
      }
    }
}

TEST(KuhnCells, CellsTileTheSimplex) {
  // Random laws must fall in some cell (barycentric weights all nonnegative).
  const std::size_t m = 4, d = 5;
  const auto lattice = nlmc::simplex_lattice(nlmc::StateSpace(m), d);
  const auto cells = nlmc::detail::kuhn_cells(lattice, d);
  std::mt19937_64 rng(5);
  for (int it = 0; it < 200; ++it) {
    const auto mu = random_law(rng, m);
    // Partial-sum coordinates scaled by d; cells are Kuhn simplices there.
    std::vector<double> z(m - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) z[k] = (acc += mu[k]) * d;
    bool found = false;
    for (std::size_t c = 0; c < cells.size() && !found; ++c) {
      const auto* ids = cells.cell(c);
      std::vector<std::vector<double>> vz;
      for (std::size_t v = 0; v < m; ++v) {
        std::vector<double> p(m - 1);
        int s = 0;
        for (std::size_t k = 0; k + 1 < m; ++k) p[k] = (s += lattice[ids[v]][k]);
        vz.push_back(p);
      }
      // Kuhn simplex: base corner plus ordered unit steps; membership means
      // the fractional parts are ordered consistently with the steps.
      std::vector<double> f(m - 1);
      bool in = true;
      for (std::size_t k = 0; k + 1 < m; ++k) {
        f[k] = z[k] - vz[0][k];
        if (f[k] < -1e-12 || f[k] > 1 + 1e-12) in = false;
      }
      for (std::size_t s = 1; in && s < m; ++s) {
        std::size_t dirn = 0;
        for (std::size_t k = 0; k + 1 < m; ++k)
          if (vz[s][k] != vz[s - 1][k]) dirn = k;
        for (std::size_t s2 = s + 1; s2 < m; ++s2) {
          std::size_t dirn2 = 0;
          for (std::size_t k = 0; k + 1 < m; ++k)
            if (vz[s2][k] != vz[s2 - 1][k]) dirn2 = k;
          if (f[dirn] < f[dirn2] - 1e-12) in = false;
        }
      }
      found = in;
    }
    EXPECT_TRUE(found);
  }
}

}  // namespace
