#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "nlmc/detail/grid_search.hpp"
#include "nlmc/kernels.hpp"
#include "nlmc/measures.hpp"

namespace nlmc {

/// Parameters of the multi-step coefficient search.
struct SearchConfig {
  std::size_t denominator = 20;    // simplex grid denominator
  double min_step = 1e-6;          // smallest local-refinement step, also smallest cell diameter
  double pair_floor = 1e-9;        // lambda ratio ignores grid pairs closer than this
  std::size_t eval_cap = 10'000'000;  // cap on grid pairs and on cell evaluations
  double tolerance = 1e-3;         // target width of the certified supremum bracket
  Exec exec = Exec::parallel;
};

enum class Certification { exact, bracketed };
std::string_view to_string(Certification c);

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// (mu, x) against (nu, y): the pair realising the worst row distance.
struct AlphaWitness {
  Distribution mu = Distribution::vertex(1, 0);
  Distribution nu = Distribution::vertex(1, 0);
  std::size_t x = 0;
  std::size_t y = 0;
  double distance = 0.0;  // tv(K_mu(x), K_nu(y))
};

/// (mu, nu, x) realising the worst law-Lipschitz ratio. When `infinitesimal`
/// is set the value is a directional derivative at mu and nu is a nearby probe.
struct LambdaWitness {
  Distribution mu = Distribution::vertex(1, 0);
  Distribution nu = Distribution::vertex(1, 0);
  std::size_t x = 0;
  bool infinitesimal = false;
  double ratio = 0.0;  // tv(K_mu(x), K_nu(x)) / tv(mu, nu) at the recorded pair
};

enum class Regime { exponential, linear, uncovered };
std::string_view to_string(Regime r);

inline constexpr double kRegimeTolerance = 1e-9;

/// exponential if lambda < alpha, linear if equal within 1e-9, else uncovered.
Regime regime_of(double alpha, double lambda);

struct SearchStats {
  std::size_t grid_points = 0;
  std::size_t grid_pairs = 0;
  std::size_t cells = 0;            // root cells of the triangulation
  std::size_t cell_evaluations = 0;
  std::size_t refine_evaluations = 0;
  bool truncated = false;           // an evaluation budget ran out; brackets stay valid, maybe wider
};

struct CoefficientReport {
  std::size_t steps = 1;
  double alpha = 0.0;   // exact value, or best value found
  double lambda = 0.0;  // exact value, or best value found
  Bracket alpha_bracket;
  Bracket lambda_bracket;
  Certification certification = Certification::exact;
  AlphaWitness alpha_witness;
  LambdaWitness lambda_witness;
  Regime regime = Regime::uncovered;
  SearchStats stats;
  std::uint64_t kernel_hash = 0;
};

/// Exact one-step coefficients by vertex enumeration. The kernel is affine in
/// the law, so both suprema are attained at simplex vertices.
CoefficientReport alpha_one_step(const AffineKernel& k);
CoefficientReport lambda_one_step(const AffineKernel& k);
CoefficientReport coefficients_one_step(const AffineKernel& k);

/// Certified brackets for the steps-step kernel. steps = 1 returns the exact
/// one-step report.
CoefficientReport coefficients_k_step(const AffineKernel& k, std::size_t steps, const SearchConfig& search = {});

/// One theorem's verdict, from the pessimistic bracket ends ("certified") and
/// the optimistic ends ("indicative").
struct RegimeCall {
  Regime certified = Regime::uncovered;
  Regime indicative = Regime::uncovered;
  bool guaranteed = false;  // certified regime covered and alpha lower end > 0
};

struct RegimeSummary {
  std::size_t steps = 2;
  RegimeCall one_step;
  RegimeCall multi_step;
  std::string conclusion;  // e.g. "two-step exponential" or "no guarantee"
};

/// Requires report1.steps == 1, report2.steps > 1, and matching kernel hashes.
RegimeSummary classify(const CoefficientReport& report1, const CoefficientReport& report2);

}  // namespace nlmc
