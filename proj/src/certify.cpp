#include "nlmc/detail/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlmc/errors.hpp"

namespace nlmc::detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t pattern_count(std::size_t m) {
  if (m > 20) throw UsageError("certified alpha search supports at most 20 states");
  return std::size_t{1} << m;
}

// Sign-pattern values of one kernel row: out[S] = 2 * row(S) - row(all).
void row_patterns(const double* row, std::size_t m, double* out) {
  const std::size_t n = std::size_t{1} << m;
  double total = 0.0;
  for (std::size_t l = 0; l < m; ++l) total += row[l];
  // subset sums by lowest set bit, stored in out then mapped in place
  out[0] = 0.0;
  for (std::size_t s = 1; s < n; ++s) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(s));
    out[s] = out[s & (s - 1)] + row[low];
  }
  for (std::size_t s = 0; s < n; ++s) out[s] = 2.0 * out[s] - total;
}

bool key_better(double v, const WitnessKey& k, double best, const WitnessKey& best_key) {
  return v > best || (v == best && k < best_key);
}

// Depth-first refinement of every Kuhn cell. Policy supplies evaluation,
// bounding and bookkeeping; one copy runs per thread and copies are merged in
// a schedule-independent way.
template <class Policy>
void refine_all(const CellSearch& search, std::size_t payload_size, std::span<const double> grid_payload,
                Policy& result) {
  const std::size_t m = search.kernel->states();
  const std::size_t nv = m;
  const std::size_t stride = m + payload_size;
  const KuhnCells& cells = *search.cells;
  const std::size_t roots = cells.size();
  const std::size_t budget = std::max<std::size_t>(32, search.eval_cap / std::max<std::size_t>(roots, 1));

  auto process_root = [&](std::size_t r, Policy& pol) {
    std::vector<std::vector<double>> stack;
    std::vector<double> root(nv * stride);
    const std::size_t* ids = cells.cell(r);
    for (std::size_t v = 0; v < nv; ++v) {
      std::copy_n(search.laws.data() + ids[v] * m, m, root.data() + v * stride);
      std::copy_n(grid_payload.data() + ids[v] * payload_size, payload_size, root.data() + v * stride + m);
    }
    stack.push_back(std::move(root));
    std::size_t used = 0;
    std::size_t counter = 0;
    std::vector<double> mid(stride);
    while (!stack.empty()) {
      std::vector<double> cell = std::move(stack.back());
      stack.pop_back();
      double diam = 0.0;
      std::size_t p = 0, q = 0;
      for (std::size_t a = 0; a < nv; ++a)
        for (std::size_t b = a + 1; b < nv; ++b) {
          double d = 0.0;
          for (std::size_t l = 0; l < m; ++l) d += std::abs(cell[a * stride + l] - cell[b * stride + l]);
          if (d > diam) {
            diam = d;
            p = a;
            q = b;
          }
        }
      const double diam2 = diam * diam;
      const bool wants = pol.needs_refine(cell.data(), stride, nv, diam2);
      if (!wants || diam < search.min_diameter || used >= search.eval_cap || used >= budget) {
        if (wants && diam >= search.min_diameter) pol.stats.truncated = true;
        pol.finalize(cell.data(), stride, nv, diam2);
        ++pol.stats.final_cells;
        continue;
      }
      for (std::size_t l = 0; l < m; ++l) mid[l] = 0.5 * (cell[p * stride + l] + cell[q * stride + l]);
      pol.evaluate(mid.data(), mid.data() + m);
      pol.visit(mid.data(), mid.data() + m, WitnessKey{r + 1, counter++});
      ++used;
      ++pol.stats.evaluations;
      std::vector<double> child = cell;
      std::copy(mid.begin(), mid.end(), child.begin() + static_cast<std::ptrdiff_t>(p * stride));
      std::copy(mid.begin(), mid.end(), cell.begin() + static_cast<std::ptrdiff_t>(q * stride));
      stack.push_back(std::move(child));
      stack.push_back(std::move(cell));
    }
  };

  if (search.exec == Exec::serial) {
    for (std::size_t r = 0; r < roots; ++r) process_root(r, result);
    return;
  }
  const Policy initial = result;
#pragma omp parallel
  {
    Policy local = initial;
    local.stats = CellStats{};
#pragma omp for schedule(dynamic, 8) nowait
    for (std::size_t r = 0; r < roots; ++r) process_root(r, local);
#pragma omp critical(nlmc_cells_reduce)
    result.merge(local);
  }
}

// ---------------------------------------------------------------------------
// Sign-pattern maxima (alpha side)

struct SignPolicy {
  const AffineKernel* kernel;
  std::size_t steps;
  std::size_t m;
  std::size_t patterns;
  std::vector<double> curvature;
  std::vector<double> thresholds;
  SignMaxima best;
  CellStats stats;
  Matrix q;
  std::vector<double> bound;

  void evaluate(const double* law, double* payload) {
    k_step_into(*kernel, std::span<const double>(law, m), steps, q);
    for (std::size_t x = 0; x < m; ++x) row_patterns(q.a.data() + x * m, m, payload + x * patterns);
  }

  void cell_bounds(const double* cell, std::size_t stride, std::size_t nv, double diam2) {
    bound.assign(patterns, kNegInf);
    for (std::size_t v = 0; v < nv; ++v) {
      const double* h = cell + v * stride + m;
      for (std::size_t x = 0; x < m; ++x) {
        const double pad = 0.5 * curvature[x] * diam2;
        const double* hx = h + x * patterns;
        for (std::size_t s = 1; s + 1 < patterns; ++s) bound[s] = std::max(bound[s], hx[s] + pad);
      }
    }
  }

  bool needs_refine(const double* cell, std::size_t stride, std::size_t nv, double diam2) {
    cell_bounds(cell, stride, nv, diam2);
    for (std::size_t s = 1; s + 1 < patterns; ++s)
      if (bound[s] > thresholds[s]) return true;
    return false;
  }

  void finalize(const double* cell, std::size_t stride, std::size_t nv, double diam2) {
    cell_bounds(cell, stride, nv, diam2);
    for (std::size_t s = 1; s + 1 < patterns; ++s) best.upper[s] = std::max(best.upper[s], bound[s]);
  }

  void visit(const double* law, const double* payload, WitnessKey key) {
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t s = 1; s + 1 < patterns; ++s) {
        const double v = payload[x * patterns + s];
        if (key_better(v, key, best.lower[s], best.key[s])) {
          best.lower[s] = v;
          best.key[s] = key;
          best.state[s] = x;
          best.law[s].assign(law, law + m);
        }
      }
  }

  void merge(const SignPolicy& other) {
    for (std::size_t s = 0; s < patterns; ++s) {
      best.upper[s] = std::max(best.upper[s], other.best.upper[s]);
      if (key_better(other.best.lower[s], other.best.key[s], best.lower[s], best.key[s])) {
        best.lower[s] = other.best.lower[s];
        best.key[s] = other.best.key[s];
        best.state[s] = other.best.state[s];
        best.law[s] = other.best.law[s];
      }
    }
    stats.evaluations += other.stats.evaluations;
    stats.final_cells += other.stats.final_cells;
    stats.truncated = stats.truncated || other.stats.truncated;
  }
};

// ---------------------------------------------------------------------------
// Derivative-norm maximum (lambda side)

std::size_t direction_count(std::size_t m) { return m * (m - 1) / 2; }

void derivative_norms(const AffineKernel& k, std::size_t steps, const double* law, std::vector<double>& jac,
                      double* out) {
  const std::size_t m = k.states();
  k_step_jacobian(k, std::span<const double>(law, m), steps, jac);
  std::size_t idx = 0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double* g = jac.data() + (x * m + j) * m;
          s += std::abs(g[a] - g[b]);
        }
        out[idx++] = 0.5 * s;
      }
}

void decode_direction(std::size_t m, std::size_t idx, std::size_t& x, std::size_t& a, std::size_t& b) {
  const std::size_t per_x = direction_count(m);
  x = idx / per_x;
  std::size_t rem = idx % per_x;
  for (a = 0; a < m; ++a) {
    const std::size_t row = m - a - 1;
    if (rem < row) {
      b = a + 1 + rem;
      return;
    }
    rem -= row;
  }
}

struct DerivativePolicy {
  const AffineKernel* kernel;
  std::size_t steps;
  std::size_t m;
  std::vector<double> curvature;
  double threshold;
  DerivativeMax best;
  CellStats stats;
  std::vector<double> jac;

  void evaluate(const double* law, double* payload) { derivative_norms(*kernel, steps, law, jac, payload); }

  double cell_bound(const double* cell, std::size_t stride, std::size_t nv, double diam2) const {
    const std::size_t per_x = direction_count(m);
    double bound = kNegInf;
    for (std::size_t v = 0; v < nv; ++v) {
      const double* g = cell + v * stride + m;
      for (std::size_t x = 0; x < m; ++x) {
        const double pad = 0.5 * curvature[x] * diam2;
        for (std::size_t d = 0; d < per_x; ++d) bound = std::max(bound, g[x * per_x + d] + pad);
      }
    }
    return bound;
  }

  bool needs_refine(const double* cell, std::size_t stride, std::size_t nv, double diam2) const {
    return cell_bound(cell, stride, nv, diam2) > threshold;
  }

  void finalize(const double* cell, std::size_t stride, std::size_t nv, double diam2) {
    best.upper = std::max(best.upper, cell_bound(cell, stride, nv, diam2));
  }

  void visit(const double* law, const double* payload, WitnessKey key) {
    const std::size_t total = m * direction_count(m);
    for (std::size_t i = 0; i < total; ++i)
      if (key_better(payload[i], key, best.lower, best.key)) {
        best.lower = payload[i];
        best.key = key;
        best.law.assign(law, law + m);
        decode_direction(m, i, best.x, best.a, best.b);
      }
  }

  void merge(const DerivativePolicy& other) {
    best.upper = std::max(best.upper, other.best.upper);
    if (key_better(other.best.lower, other.best.key, best.lower, best.key)) {
      const double upper = best.upper;
      best = other.best;
      best.upper = upper;
    }
    stats.evaluations += other.stats.evaluations;
    stats.final_cells += other.stats.final_cells;
    stats.truncated = stats.truncated || other.stats.truncated;
  }
};

}  // namespace

std::vector<double> sign_values(std::span<const double> q, std::size_t points, std::size_t m) {
  const std::size_t patterns = pattern_count(m);
  std::vector<double> h(points * m * patterns);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t x = 0; x < m; ++x)
      row_patterns(q.data() + (i * m + x) * m, m, h.data() + (i * m + x) * patterns);
  return h;
}

SignMaxima grid_sign_maxima(std::span<const double> h, std::span<const double> laws, std::size_t points,
                            std::size_t m) {
  const std::size_t patterns = pattern_count(m);
  SignMaxima out;
  out.lower.assign(patterns, kNegInf);
  out.upper.assign(patterns, kNegInf);
  out.law.assign(patterns, {});
  out.state.assign(patterns, 0);
  out.key.assign(patterns, WitnessKey{0, 0});
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t s = 0; s < patterns; ++s) {
        const double v = h[(i * m + x) * patterns + s];
        if (v > out.lower[s]) {
          out.lower[s] = v;
          out.state[s] = x;
          out.key[s] = WitnessKey{0, i};
          out.law[s].assign(laws.begin() + static_cast<std::ptrdiff_t>(i * m),
                            laws.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
        }
      }
  return out;
}

SignMaxima certify_sign_maxima(const CellSearch& search, std::span<const double> h_grid,
                               std::span<const double> curvature, std::span<const double> thresholds,
                               SignMaxima seed) {
  const std::size_t m = search.kernel->states();
  const std::size_t patterns = pattern_count(m);
  SignPolicy policy{search.kernel,
                    search.steps,
                    m,
                    patterns,
                    std::vector<double>(curvature.begin(), curvature.end()),
                    std::vector<double>(thresholds.begin(), thresholds.end()),
                    std::move(seed),
                    {},
                    {},
                    {}};
  refine_all(search, m * patterns, h_grid, policy);
  policy.best.stats = policy.stats;
  return policy.best;
}

std::vector<double> derivative_values(const AffineKernel& k, std::size_t steps, std::span<const double> laws,
                                      std::size_t points, Exec exec) {
  const std::size_t m = k.states();
  const std::size_t per_point = m * direction_count(m);
  std::vector<double> g(points * per_point);
  if (exec == Exec::serial) {
    std::vector<double> jac;
    for (std::size_t i = 0; i < points; ++i) derivative_norms(k, steps, laws.data() + i * m, jac, g.data() + i * per_point);
    return g;
  }
#pragma omp parallel
  {
    std::vector<double> jac;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < points; ++i) derivative_norms(k, steps, laws.data() + i * m, jac, g.data() + i * per_point);
  }
  return g;
}

DerivativeMax grid_derivative_max(std::span<const double> g, std::span<const double> laws, std::size_t points,
                                  std::size_t m) {
  DerivativeMax out;
  out.lower = kNegInf;
  out.upper = kNegInf;
  const std::size_t per_point = m * direction_count(m);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t d = 0; d < per_point; ++d) {
      const double v = g[i * per_point + d];
      if (v > out.lower) {
        out.lower = v;
        out.key = WitnessKey{0, i};
        out.law.assign(laws.begin() + static_cast<std::ptrdiff_t>(i * m),
                       laws.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
        decode_direction(m, d, out.x, out.a, out.b);
      }
    }
  if (per_point == 0) out.lower = 0.0;
  return out;
}

DerivativeMax certify_derivative_max(const CellSearch& search, std::span<const double> g_grid,
                                     std::span<const double> mixed_curvature, double threshold,
                                     DerivativeMax seed) {
  const std::size_t m = search.kernel->states();
  if (m < 2) {
    seed.lower = seed.upper = 0.0;
    return seed;
  }
  DerivativePolicy policy{search.kernel,
                          search.steps,
                          m,
                          std::vector<double>(mixed_curvature.begin(), mixed_curvature.end()),
                          threshold,
                          std::move(seed),
                          {},
                          {}};
  refine_all(search, m * direction_count(m), g_grid, policy);
  policy.best.stats = policy.stats;
  return policy.best;
}

}  // namespace nlmc::detail
