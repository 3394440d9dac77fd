#include "nlmc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

namespace nlmc {

Trajectory iterate(const AffineKernel& k, const Distribution& mu0, std::size_t n) {
  require_valid(k);
  if (mu0.size() != k.states()) throw DimensionError("initial law does not match the kernel's state space");
  Trajectory t;
  t.laws.reserve(n + 1);
  t.tv_deltas.reserve(n);
  t.laws.push_back(mu0);
  for (std::size_t i = 0; i < n; ++i) {
    t.laws.push_back(step(k, t.laws.back()));
    t.tv_deltas.push_back(tv_distance(t.laws[i], t.laws[i + 1]));
  }
  return t;
}

std::vector<Distribution> default_starts(std::size_t states) {
  std::vector<Distribution> out;
  for (std::size_t x = 0; x < states; ++x) out.push_back(Distribution::vertex(states, x));
  out.push_back(Distribution::uniform(states));
  return out;
}

namespace {

struct Converged {
  std::optional<Distribution> law;
  std::size_t iterations = 0;
  std::exception_ptr error;
};

Converged run_start(const AffineKernel& k, const Distribution& start, double tol, std::size_t max_iters) {
  Converged c;
  try {
    Distribution cur = start;
    double delta = 0.0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
      Distribution next = step(k, cur);
      delta = tv_distance(cur, next);
      cur = std::move(next);
      if (delta <= tol) {
        c.law = std::move(cur);
        c.iterations = it;
        return c;
      }
    }
    throw NonConvergenceError("fixed-point iteration did not reach tolerance within " + std::to_string(max_iters) +
                                  " iterations (last delta " + std::to_string(delta) + ")",
                              cur, delta, max_iters);
  } catch (...) {
    c.error = std::current_exception();
  }
  return c;
}

}  // namespace

InvariantResult invariant(const AffineKernel& k, const std::vector<Distribution>& starts, double tol,
                          std::size_t max_iters) {
  require_valid(k);
  if (starts.empty()) throw UsageError("invariant: at least one start is required");
  if (!(tol > 0.0)) throw UsageError("invariant: tolerance must be positive");
  for (const auto& s : starts)
    if (s.size() != k.states()) throw DimensionError("start law does not match the kernel's state space");

  std::vector<Converged> runs(starts.size());
  const auto count = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) runs[i] = run_start(k, starts[i], tol, max_iters);
  for (const auto& r : runs)
    if (r.error) std::rethrow_exception(r.error);

  InvariantResult out;
  out.pi = *runs.front().law;
  out.iterations = runs.front().iterations;
  out.starts = starts;
  for (const auto& r : runs) out.limits.push_back(*r.law);
  out.residual = tv_distance(step(k, out.pi), out.pi);
  for (std::size_t i = 0; i < out.limits.size(); ++i)
    for (std::size_t j = i + 1; j < out.limits.size(); ++j)
      out.max_pairwise_gap = std::max(out.max_pairwise_gap, tv_distance(out.limits[i], out.limits[j]));
  out.unique = out.max_pairwise_gap <= kUniquenessTolerance;
  return out;
}

namespace {

double odd_factor(double lambda1, std::size_t n) { return (n % 2 == 1) ? 1.0 + lambda1 : 1.0; }

double exponential_bound(double alpha2, double lambda2, double lambda1, double d0, std::size_t n) {
  return d0 * std::pow(1.0 - alpha2 + lambda2, static_cast<double>(n / 2)) * odd_factor(lambda1, n);
}

double linear_bound(double lambda2, double lambda1, double d0, std::size_t n) {
  return d0 / (1.0 + (lambda2 * static_cast<double>(n) / 2.0) * d0) * odd_factor(lambda1, n);
}

}  // namespace

double bound_value(double alpha2, double lambda2, double lambda1, double d0, std::size_t n) {
  if (lambda2 > alpha2 + kEqualityTolerance)
    throw HypothesisError("theorem hypotheses violated: lambda2 = " + std::to_string(lambda2) + " > alpha2 = " +
                          std::to_string(alpha2));
  if (lambda2 < 0.0 || alpha2 > 1.0 || lambda1 < 0.0) throw UsageError("bound_value: coefficients out of range");
  if (d0 < 0.0 || d0 > 2.0 + kNormTolerance) throw UsageError("bound_value: initial distance must lie in [0, 2]");
  if (std::abs(lambda2 - alpha2) <= kEqualityTolerance) return linear_bound(lambda2, lambda1, d0, n);
  return exponential_bound(alpha2, lambda2, lambda1, d0, n);
}

std::string_view to_string(BoundBranch b) {
  switch (b) {
    case BoundBranch::exponential:
      return "exponential";
    case BoundBranch::linear:
      return "linear";
    case BoundBranch::both:
      return "both";
  }
  return "exponential";
}

AuditConstants audit_constants(const CoefficientReport& report2, const CoefficientReport& report1) {
  if (report1.steps != 1 || report2.steps != 2)
    throw UsageError("audit requires a one-step and a two-step coefficient report");
  if (report1.kernel_hash != report2.kernel_hash) throw UsageError("audit: reports describe different kernels");
  AuditConstants c;
  c.alpha2 = report2.alpha_bracket.lower;
  c.lambda2 = report2.lambda_bracket.upper;
  c.lambda1 = report1.lambda_bracket.upper;
  if (c.lambda2 > c.alpha2 + kEqualityTolerance)
    throw HypothesisError("theorem hypotheses not certified: lambda2 upper " + std::to_string(c.lambda2) +
                          " exceeds alpha2 lower " + std::to_string(c.alpha2));
  c.branch = std::abs(c.lambda2 - c.alpha2) <= kEqualityTolerance ? BoundBranch::both : BoundBranch::exponential;
  return c;
}

double audit_bound(const AuditConstants& c, double d0, std::size_t n) {
  if (c.branch == BoundBranch::exponential) return bound_value(c.alpha2, c.lambda2, c.lambda1, d0, n);
  const double lin = linear_bound(c.lambda2, c.lambda1, d0, n);
  if (c.branch == BoundBranch::linear) return lin;
  const double expo = exponential_bound(c.alpha2, c.lambda2, c.lambda1, d0, n);
  return std::max(lin, expo);
}

namespace {

std::vector<BoundAudit> audit_against(const Trajectory& a, const std::vector<Distribution>& b,
                                      const AuditConstants& c) {
  const double d0 = tv_distance(a.laws.front(), b.front());
  std::vector<BoundAudit> out;
  out.reserve(a.laws.size());
  for (std::size_t n = 0; n < a.laws.size(); ++n) {
    BoundAudit row;
    row.n = n;
    row.observed = tv_distance(a.laws[n], b[std::min(n, b.size() - 1)]);
    row.bound = audit_bound(c, d0, n);
    row.slack = row.bound - row.observed;
    row.satisfied = row.slack >= -kAuditSlack;
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::vector<BoundAudit> audit_convergence(const AffineKernel& k, const Distribution& mu0, const Distribution& pi,
                                          const CoefficientReport& report2, const CoefficientReport& report1,
                                          std::size_t n_max) {
  const AuditConstants c = audit_constants(report2, report1);
  if (report2.kernel_hash != kernel_fingerprint(k)) throw UsageError("audit: report does not match the kernel");
  if (pi.size() != k.states()) throw DimensionError("invariant law does not match the kernel's state space");
  const Trajectory t = iterate(k, mu0, n_max);
  return audit_against(t, {pi}, c);
}

std::vector<BoundAudit> audit_pair(const AffineKernel& k, const Distribution& mu0, const Distribution& nu0,
                                   const CoefficientReport& report2, const CoefficientReport& report1,
                                   std::size_t n_max) {
  const AuditConstants c = audit_constants(report2, report1);
  if (report2.kernel_hash != kernel_fingerprint(k)) throw UsageError("audit: report does not match the kernel");
  const Trajectory a = iterate(k, mu0, n_max);
  const Trajectory b = iterate(k, nu0, n_max);
  return audit_against(a, b.laws, c);
}

std::vector<OddStepCheck> odd_step_checks(const AffineKernel& k, const Distribution& mu0, const Distribution& nu0,
                                          double lambda1, std::size_t n) {
  const Trajectory a = iterate(k, mu0, n);
  const Trajectory b = iterate(k, nu0, n);
  std::vector<OddStepCheck> out;
  for (std::size_t t = 0; t + 1 <= n; t += 2) {
    OddStepCheck c;
    c.t = t;
    c.before = tv_distance(a.laws[t], b.laws[t]);
    c.after = tv_distance(a.laws[t + 1], b.laws[t + 1]);
    c.bound = (1.0 + lambda1) * c.before;
    c.satisfied = c.after <= c.bound + kAuditSlack;
    out.push_back(c);
  }
  return out;
}

double lemma_bound_sequence(double a0, double lambda, std::size_t n) {
  if (!(a0 > 0.0 && a0 <= 1.0)) throw UsageError("lemma bound: a0 must lie in (0, 1]");
  if (!(lambda > 0.0)) throw UsageError("lemma bound: lambda must be positive");
  return a0 / (1.0 + a0 * lambda * static_cast<double>(n));
}

double lemma_g(double a0, double lambda, double x) {
  if (!(a0 > 0.0 && a0 <= 1.0)) throw UsageError("lemma bound: a0 must lie in (0, 1]");
  if (!(lambda > 0.0)) throw UsageError("lemma bound: lambda must be positive");
  if (!(x > 0.0)) throw UsageError("lemma bound: x must be positive");
  return (1.0 / x - 1.0 / a0) / lambda;
}

}  // namespace nlmc
