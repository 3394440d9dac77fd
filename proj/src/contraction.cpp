#include "nlmc/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlmc/detail/certify.hpp"
#include "nlmc/detail/curvature.hpp"
#include "nlmc/detail/grid_search.hpp"
#include "nlmc/detail/simplex_cells.hpp"
#include "nlmc/errors.hpp"

namespace nlmc {

std::string_view to_string(Certification c) { return c == Certification::exact ? "exact" : "bracketed"; }

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::exponential:
      return "exponential";
    case Regime::linear:
      return "linear";
    case Regime::uncovered:
      return "uncovered";
  }
  return "uncovered";
}

Regime regime_of(double alpha, double lambda) {
  if (std::abs(lambda - alpha) <= kRegimeTolerance) return Regime::linear;
  return lambda < alpha ? Regime::exponential : Regime::uncovered;
}

namespace {

constexpr double kPad = 1e-12;

double pad_down(double v) { return v - kPad * std::max(1.0, std::abs(v)); }
double pad_up(double v) { return v + kPad * std::max(1.0, std::abs(v)); }

double l1(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t l = 0; l < m; ++l) s += std::abs(a[l] - b[l]);
  return s;
}

Distribution law_of(std::span<const double> w) { return Distribution(std::vector<double>(w.begin(), w.end())); }

std::vector<Matrix> vertex_kernels(const AffineKernel& k) {
  const std::size_t m = k.states();
  std::vector<Matrix> out(m);
  std::vector<double> e(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    std::fill(e.begin(), e.end(), 0.0);
    e[a] = 1.0;
    k.evaluate_into(e, out[a]);
  }
  return out;
}

// Coordinate mass-transfer hill climbing with step halving. `value` scores a
// law; the law is improved in place. Returns the number of evaluations.
template <class Score>
std::size_t climb(std::vector<double>& law, double& best, double start, double min_step, std::size_t budget,
                  Score&& value) {
  const std::size_t m = law.size();
  std::size_t evals = 0;
  std::vector<double> trial(m);
  for (double h = start; h >= min_step && evals < budget;) {
    bool improved = false;
    for (std::size_t a = 0; a < m && evals < budget; ++a)
      for (std::size_t b = 0; b < m && evals < budget; ++b) {
        if (a == b || law[a] <= 0.0) continue;
        const double t = std::min(h, law[a]);
        trial = law;
        trial[a] -= t;
        trial[b] += t;
        if (trial[a] < 0.0) trial[a] = 0.0;
        const double v = value(trial);
        ++evals;
        if (v > best) {
          best = v;
          law = trial;
          improved = true;
        }
      }
    if (!improved) h *= 0.5;
  }
  return evals;
}

}  // namespace

CoefficientReport alpha_one_step(const AffineKernel& k) {
  require_valid(k);
  const std::size_t m = k.states();
  const auto p = vertex_kernels(k);
  // Overlap mass sum_j min(.,.) equals 1 - tv/2 and avoids the cancellation
  // in forming 1 - tv/2.
  double best = 2.0;
  std::size_t bx = 0, by = 0, ba = 0, bb = 0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          const double* u = p[a].a.data() + x * m;
          const double* v = p[b].a.data() + y * m;
          double overlap = 0.0;
          for (std::size_t j = 0; j < m; ++j) overlap += std::min(u[j], v[j]);
          if (overlap < best) {
            best = overlap;
            bx = x;
            by = y;
            ba = a;
            bb = b;
          }
        }
  CoefficientReport r;
  r.steps = 1;
  r.alpha = std::clamp(best, 0.0, 1.0);
  r.alpha_bracket = {r.alpha, r.alpha};
  r.certification = Certification::exact;
  r.alpha_witness = {Distribution::vertex(m, ba), Distribution::vertex(m, bb), bx, by,
                     l1(p[ba].a.data() + bx * m, p[bb].a.data() + by * m, m)};
  r.lambda_witness = {Distribution::vertex(m, 0), Distribution::vertex(m, 0), 0, false, 0.0};
  r.kernel_hash = kernel_fingerprint(k);
  return r;
}

CoefficientReport lambda_one_step(const AffineKernel& k) {
  require_valid(k);
  const std::size_t m = k.states();
  const auto lam = detail::row_lambdas(k);
  double best = 0.0;
  std::size_t bx = 0, ba = 0, bb = m > 1 ? 1 : 0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += std::abs(k.coeff(x, j, a) - k.coeff(x, j, b));
        if (0.5 * s > best) {
          best = 0.5 * s;
          bx = x;
          ba = a;
          bb = b;
        }
      }
  const auto p = vertex_kernels(k);
  CoefficientReport r;
  r.steps = 1;
  r.lambda = best;
  r.lambda_bracket = {best, best};
  r.certification = Certification::exact;
  const double ratio = ba == bb ? 0.0 : 0.5 * l1(p[ba].a.data() + bx * m, p[bb].a.data() + bx * m, m);
  r.lambda_witness = {Distribution::vertex(m, ba), Distribution::vertex(m, bb), bx, false, ratio};
  r.alpha_witness = {Distribution::vertex(m, 0), Distribution::vertex(m, 0), 0, 0, 0.0};
  r.kernel_hash = kernel_fingerprint(k);
  return r;
}

CoefficientReport coefficients_one_step(const AffineKernel& k) {
  CoefficientReport r = alpha_one_step(k);
  const CoefficientReport l = lambda_one_step(k);
  r.lambda = l.lambda;
  r.lambda_bracket = l.lambda_bracket;
  r.lambda_witness = l.lambda_witness;
  r.regime = regime_of(r.alpha, r.lambda);
  return r;
}

CoefficientReport coefficients_k_step(const AffineKernel& k, std::size_t steps, const SearchConfig& search) {
  if (steps == 0) throw UsageError("step count must be at least 1");
  require_valid(k);
  if (steps == 1) return coefficients_one_step(k);
  if (search.min_step <= 0.0) throw UsageError("min_step must be positive");
  if (search.pair_floor < 0.0) throw UsageError("pair_floor must be nonnegative");
  if (search.tolerance <= 0.0) throw UsageError("bracket tolerance must be positive");

  const std::size_t m = k.states();
  CoefficientReport r;
  r.steps = steps;
  r.certification = Certification::bracketed;
  r.kernel_hash = kernel_fingerprint(k);
  if (m == 1) {
    const Distribution one = Distribution::vertex(1, 0);
    r.alpha = 1.0;
    r.alpha_bracket = {1.0, 1.0};
    r.alpha_witness = {one, one, 0, 0, 0.0};
    r.lambda_witness = {one, one, 0, false, 0.0};
    r.regime = regime_of(r.alpha, r.lambda);
    return r;
  }

  // Grid and evaluated kernels.
  const auto lattice = simplex_lattice(k.space(), search.denominator, search.eval_cap);
  const std::size_t points = lattice.size();
  if (points > 0 && points > search.eval_cap / points)
    throw CapError("grid pair search with denominator " + std::to_string(search.denominator) + " needs " +
                       std::to_string(points) + "^2 evaluations",
                   search.eval_cap);
  std::vector<double> laws(points * m);
  const double scale = 1.0 / static_cast<double>(search.denominator);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t l = 0; l < m; ++l) laws[i * m + l] = lattice[i][l] * scale;
  std::vector<double> q(points * m * m);
  auto fill_q = [&](std::size_t i, Matrix& scratch) {
    k_step_into(k, std::span<const double>(laws.data() + i * m, m), steps, scratch);
    std::copy(scratch.a.begin(), scratch.a.end(), q.begin() + static_cast<std::ptrdiff_t>(i * m * m));
  };
  if (search.exec == Exec::serial) {
    Matrix scratch;
    for (std::size_t i = 0; i < points; ++i) fill_q(i, scratch);
  } else {
#pragma omp parallel
    {
      Matrix scratch;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < points; ++i) fill_q(i, scratch);
    }
  }
  r.stats.grid_points = points;
  r.stats.grid_pairs = points * points;

  const auto alpha_hit = detail::grid_alpha_max(q, points, m, search.exec);
  const auto lambda_hit = detail::grid_lambda_max(q, laws, points, m, search.pair_floor, search.exec);
  const auto curv = detail::curvature_bounds(k, steps);
  const auto cells = detail::kuhn_cells(lattice, search.denominator);
  r.stats.cells = cells.size();
  detail::CellSearch cs{&k, steps, laws, &cells, search.min_step, search.eval_cap, search.exec};

  const double start_step = scale;
  const std::size_t refine_budget = std::min<std::size_t>(search.eval_cap, 200'000);

  // ---- alpha: sup over (mu, x, nu, y) of tv(Q_mu(x), Q_nu(y)) ----
  {
    const std::size_t patterns = std::size_t{1} << m;
    const std::size_t full = patterns - 1;
    const auto h = detail::sign_values(q, points, m);
    auto seed = detail::grid_sign_maxima(h, laws, points, m);
    const double s_grid = alpha_hit.value;
    std::vector<double> thresholds(patterns, 0.0);
    for (std::size_t s = 1; s < full; ++s)
      thresholds[s] = 0.5 * (s_grid + search.tolerance + seed.lower[s] - seed.lower[full ^ s]);
    const auto sm = detail::certify_sign_maxima(cs, h, curv.curvature, thresholds, std::move(seed));
    r.stats.cell_evaluations += sm.stats.evaluations;
    r.stats.truncated = r.stats.truncated || sm.stats.truncated;

    double s_upper = 0.0;
    double s_pattern = -1.0;
    std::size_t best_s = 1;
    for (std::size_t s = 1; s < full; ++s) {
      const double up = std::max(sm.upper[s], sm.lower[s]) + std::max(sm.upper[full ^ s], sm.lower[full ^ s]);
      s_upper = std::max(s_upper, up);
      const double lo = sm.lower[s] + sm.lower[full ^ s];
      if (lo > s_pattern) {
        s_pattern = lo;
        best_s = s;
      }
    }

    // Start point for local refinement: the better of the grid pair and the
    // pattern decomposition.
    std::vector<double> mu(laws.begin() + static_cast<std::ptrdiff_t>(alpha_hit.i * m),
                           laws.begin() + static_cast<std::ptrdiff_t>((alpha_hit.i + 1) * m));
    std::vector<double> nu(laws.begin() + static_cast<std::ptrdiff_t>(alpha_hit.j * m),
                           laws.begin() + static_cast<std::ptrdiff_t>((alpha_hit.j + 1) * m));
    std::size_t wx = alpha_hit.x, wy = alpha_hit.y;
    Matrix qa, qb;
    auto pair_value = [&](const std::vector<double>& a, std::size_t x, const std::vector<double>& b,
                          std::size_t y) {
      k_step_into(k, a, steps, qa);
      k_step_into(k, b, steps, qb);
      return l1(qa.a.data() + x * m, qb.a.data() + y * m, m);
    };
    double s_lower = pair_value(mu, wx, nu, wy);
    {
      const std::size_t cs_ = full ^ best_s;
      const double v = pair_value(sm.law[best_s], sm.state[best_s], sm.law[cs_], sm.state[cs_]);
      if (v > s_lower) {
        s_lower = v;
        mu = sm.law[best_s];
        nu = sm.law[cs_];
        wx = sm.state[best_s];
        wy = sm.state[cs_];
      }
    }
    // Alternate refinement of mu and nu.
    for (int round = 0; round < 4; ++round) {
      const double before = s_lower;
      r.stats.refine_evaluations += climb(mu, s_lower, start_step, search.min_step, refine_budget,
                                          [&](const std::vector<double>& t) { return pair_value(t, wx, nu, wy); });
      r.stats.refine_evaluations += climb(nu, s_lower, start_step, search.min_step, refine_budget,
                                          [&](const std::vector<double>& t) { return pair_value(mu, wx, t, wy); });
      if (!(s_lower > before)) break;
    }
    s_upper = std::max(s_upper, s_lower);
    r.alpha = std::clamp(1.0 - 0.5 * s_lower, 0.0, 1.0);
    r.alpha_bracket = {std::clamp(pad_down(1.0 - 0.5 * s_upper), 0.0, 1.0),
                       std::clamp(pad_up(1.0 - 0.5 * s_lower), 0.0, 1.0)};
    r.alpha_witness = {law_of(mu), law_of(nu), wx, wy, s_lower};
  }

  // ---- lambda: sup over (mu != nu, x) of tv(Q_mu(x), Q_nu(x)) / tv(mu, nu) ----
  {
    const auto g = detail::derivative_values(k, steps, laws, points, search.exec);
    auto dseed = detail::grid_derivative_max(g, laws, points, m);
    const double grid_ratio = std::max(lambda_hit.value, 0.0);
    const double threshold = std::max(grid_ratio, dseed.lower) + 0.5 * search.tolerance;
    auto dm = detail::certify_derivative_max(cs, g, curv.mixed_curvature, threshold, std::move(dseed));
    r.stats.cell_evaluations += dm.stats.evaluations;
    r.stats.truncated = r.stats.truncated || dm.stats.truncated;

    // Refine the derivative witness.
    std::vector<double> xi = dm.law;
    double g_best = dm.lower;
    std::vector<double> jac;
    auto deriv = [&](const std::vector<double>& t) {
      k_step_jacobian(k, t, steps, jac);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double* row = jac.data() + (dm.x * m + j) * m;
        s += std::abs(row[dm.a] - row[dm.b]);
      }
      return 0.5 * s;
    };
    r.stats.refine_evaluations += climb(xi, g_best, start_step, search.min_step, refine_budget, deriv);

    // Concrete pair realising the derivative witness: a short step along
    // e_a - e_b. Its ratio is reported but not used as a bound, since
    // cancellation makes short-step ratios unreliable.
    Matrix qa, qb;
    auto ratio_at = [&](const std::vector<double>& a, const std::vector<double>& b, std::size_t x) {
      const double d = l1(a.data(), b.data(), m);
      if (d <= 0.0) return 0.0;
      k_step_into(k, a, steps, qa);
      k_step_into(k, b, steps, qb);
      return l1(qa.a.data() + x * m, qb.a.data() + x * m, m) / d;
    };
    std::vector<double> probe_mu = xi;
    // Keep room to move along the direction in either sense.
    const double room = 1e-6;
    if (probe_mu[dm.a] < room && probe_mu[dm.b] < room) {
      for (auto& w : probe_mu) w *= (1.0 - 2.0 * room);
      probe_mu[dm.a] += room;
      probe_mu[dm.b] += room;
    }
    const double sign = probe_mu[dm.b] >= room ? 1.0 : -1.0;
    std::vector<double> best_nu = probe_mu;
    best_nu[dm.a] += sign * room;
    best_nu[dm.b] -= sign * room;
    const double probe_ratio = ratio_at(probe_mu, best_nu, dm.x);

    // Grid ratio candidate, refined by moving nu.
    std::vector<double> gmu(laws.begin() + static_cast<std::ptrdiff_t>(lambda_hit.i * m),
                            laws.begin() + static_cast<std::ptrdiff_t>((lambda_hit.i + 1) * m));
    std::vector<double> gnu(laws.begin() + static_cast<std::ptrdiff_t>(lambda_hit.j * m),
                            laws.begin() + static_cast<std::ptrdiff_t>((lambda_hit.j + 1) * m));
    double pair_best = lambda_hit.value >= 0.0 ? ratio_at(gmu, gnu, lambda_hit.x) : 0.0;

    const double lower = std::max({pair_best, g_best, 0.0});
    const double upper = std::max(dm.upper, lower);
    r.lambda = lower;
    r.lambda_bracket = {std::max(0.0, pad_down(lower)), pad_up(upper)};
    if (lambda_hit.value >= 0.0 && pair_best >= g_best) {
      r.lambda_witness = {law_of(gmu), law_of(gnu), lambda_hit.x, false, pair_best};
    } else {
      r.lambda_witness = {law_of(probe_mu), law_of(best_nu), dm.x, true, probe_ratio};
    }
  }

  r.regime = regime_of(r.alpha, r.lambda);
  return r;
}

RegimeSummary classify(const CoefficientReport& report1, const CoefficientReport& report2) {
  if (report1.steps != 1) throw UsageError("classify: first report must be one-step");
  if (report2.steps < 2) throw UsageError("classify: second report must be multi-step");
  if (report1.kernel_hash != report2.kernel_hash) throw UsageError("classify: reports describe different kernels");
  auto call = [](const CoefficientReport& r) {
    RegimeCall c;
    c.certified = regime_of(r.alpha_bracket.lower, r.lambda_bracket.upper);
    c.indicative = regime_of(r.alpha_bracket.upper, r.lambda_bracket.lower);
    c.guaranteed = c.certified != Regime::uncovered && r.alpha_bracket.lower > 0.0;
    return c;
  };
  RegimeSummary s;
  s.steps = report2.steps;
  s.one_step = call(report1);
  s.multi_step = call(report2);
  const std::string multi = report2.steps == 2 ? "two-step" : std::to_string(report2.steps) + "-step";
  if (s.one_step.guaranteed)
    s.conclusion = "one-step " + std::string(to_string(s.one_step.certified));
  else if (s.multi_step.guaranteed)
    s.conclusion = multi + " " + std::string(to_string(s.multi_step.certified));
  else
    s.conclusion = "no guarantee";
  return s;
}

}  // namespace nlmc
