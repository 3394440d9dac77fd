#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlmc/contraction.hpp"
#include "nlmc/errors.hpp"
#include "nlmc/kernels.hpp"
#include "nlmc/measures.hpp"

namespace nlmc {

/// mu_0, ..., mu_n under mu_{t+1} = mu_t P_{mu_t}.
struct Trajectory {
  std::vector<Distribution> laws;
  std::vector<double> tv_deltas;  // tv(mu_t, mu_{t+1})
};

Trajectory iterate(const AffineKernel& k, const Distribution& mu0, std::size_t n);

/// Fixed-point iteration failed to settle within the iteration budget.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Distribution last, double delta, std::size_t iterations)
      : Error(what), last_(std::move(last)), delta_(delta), iterations_(iterations) {}
  const Distribution& last() const noexcept { return last_; }
  double delta() const noexcept { return delta_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  Distribution last_;
  double delta_;
  std::size_t iterations_;
};

inline constexpr double kUniquenessTolerance = 1e-10;

struct InvariantResult {
  Distribution pi = Distribution::vertex(1, 0);
  double residual = 0.0;        // tv(pi P_pi, pi)
  std::size_t iterations = 0;   // for the first start
  std::vector<Distribution> starts;
  std::vector<Distribution> limits;  // converged law per start
  double max_pairwise_gap = 0.0;
  bool unique = true;           // max_pairwise_gap <= kUniquenessTolerance
};

/// All vertices followed by the uniform law.
std::vector<Distribution> default_starts(std::size_t states);

InvariantResult invariant(const AffineKernel& k, const std::vector<Distribution>& starts, double tol = 1e-13,
                          std::size_t max_iters = 100'000);

/// Distance bound after n steps from initial distance d0.
///   lambda2 < alpha2:  d0 (1 - alpha2 + lambda2)^floor(n/2)      * odd
///   lambda2 = alpha2:  d0 / (1 + (lambda2 n / 2) d0)             * odd
/// where odd = 1 + lambda1 for odd n and 1 otherwise. Equality is tested
/// within 1e-12. Throws HypothesisError when lambda2 > alpha2.
double bound_value(double alpha2, double lambda2, double lambda1, double d0, std::size_t n);

inline constexpr double kEqualityTolerance = 1e-12;
inline constexpr double kAuditSlack = 1e-9;

enum class BoundBranch { exponential, linear, both };
std::string_view to_string(BoundBranch b);

struct BoundAudit {
  std::size_t n = 0;
  double observed = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool satisfied = true;  // slack >= -1e-9
};

/// Constants actually used by an audit: pessimistic bracket ends.
struct AuditConstants {
  double alpha2 = 0.0;   // lower end of the multi-step alpha bracket
  double lambda2 = 0.0;  // upper end of the multi-step lambda bracket
  double lambda1 = 0.0;  // upper end of the one-step lambda bracket
  BoundBranch branch = BoundBranch::exponential;
};

/// Checks the theorem hypotheses on the certified ends; throws
/// HypothesisError if lambda2 upper > alpha2 lower + 1e-12. When the two are
/// within 1e-12 both branches are evaluated and the weaker one binds.
AuditConstants audit_constants(const CoefficientReport& report2, const CoefficientReport& report1);

double audit_bound(const AuditConstants& c, double d0, std::size_t n);

/// tv(mu_n, pi) against the bound with d0 = tv(mu_0, pi), for n = 0..n_max.
std::vector<BoundAudit> audit_convergence(const AffineKernel& k, const Distribution& mu0, const Distribution& pi,
                                          const CoefficientReport& report2, const CoefficientReport& report1,
                                          std::size_t n_max);

/// Two-trajectory form: tv(mu_n, nu_n) with d0 = tv(mu_0, nu_0).
std::vector<BoundAudit> audit_pair(const AffineKernel& k, const Distribution& mu0, const Distribution& nu0,
                                   const CoefficientReport& report2, const CoefficientReport& report1,
                                   std::size_t n_max);

/// One odd-step check: tv(mu_{t+1}, nu_{t+1}) <= (1 + lambda1) tv(mu_t, nu_t).
struct OddStepCheck {
  std::size_t t = 0;
  double before = 0.0;
  double after = 0.0;
  double bound = 0.0;
  bool satisfied = true;
};

/// Runs both trajectories for n steps and checks every step from an even
/// index.
std::vector<OddStepCheck> odd_step_checks(const AffineKernel& k, const Distribution& mu0, const Distribution& nu0,
                                          double lambda1, std::size_t n);

/// a0 / (1 + a0 lambda n), the inverse of g(x) = (1/x - 1/a0) / lambda.
double lemma_bound_sequence(double a0, double lambda, std::size_t n);

/// g(x) = integral from x to a0 of dt / (t * lambda * t).
double lemma_g(double a0, double lambda, double x);

}  // namespace nlmc
