#include "nlmc/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "nlmc/errors.hpp"

namespace nlmc {

Matrix Matrix::identity(std::size_t size) {
  Matrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

namespace {

void multiply_into(const Matrix& lhs, const Matrix& rhs, Matrix& out) {
  const std::size_t n = lhs.n;
  out.n = n;
  out.a.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      const double v = lhs.a[i * n + l];
      if (v == 0.0) continue;
      const double* r = rhs.a.data() + l * n;
      double* o = out.a.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += v * r[j];
    }
}

// out += lhs * rhs
void multiply_add(const Matrix& lhs, const Matrix& rhs, Matrix& out) {
  const std::size_t n = lhs.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      const double v = lhs.a[i * n + l];
      if (v == 0.0) continue;
      const double* r = rhs.a.data() + l * n;
      double* o = out.a.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += v * r[j];
    }
}

void check_dims(const AffineKernel& k, std::size_t size) {
  if (k.states() != size)
    throw DimensionError("law has " + std::to_string(size) + " states, kernel has " +
                         std::to_string(k.states()));
}

}  // namespace

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.n != rhs.n) throw DimensionError("matrix product: dimension mismatch");
  Matrix out;
  multiply_into(lhs, rhs, out);
  return out;
}

AffineKernel::AffineKernel(std::size_t states, Matrix base, std::vector<CoeffEntry> coeff)
    : base_(std::move(base)) {
  StateSpace space(states);
  if (base_.n != space.size() || base_.a.size() != states * states)
    throw DimensionError("base matrix must be " + std::to_string(states) + "x" + std::to_string(states));
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> merged;
  for (const auto& e : coeff) {
    if (e.from >= states || e.to >= states || e.law >= states)
      throw DimensionError("coefficient index out of range");
    if (!std::isfinite(e.value)) throw DimensionError("non-finite coefficient");
    merged[{e.from, e.to, e.law}] += e.value;
  }
  for (const auto& [key, value] : merged) {
    if (std::abs(value) < 1e-15) continue;
    coeff_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), value});
  }
}

double AffineKernel::coeff(std::size_t x, std::size_t j, std::size_t k) const {
  auto it = std::lower_bound(coeff_.begin(), coeff_.end(), std::make_tuple(x, j, k),
                             [](const CoeffEntry& e, const auto& key) {
                               return std::make_tuple(e.from, e.to, e.law) < key;
                             });
  if (it != coeff_.end() && it->from == x && it->to == j && it->law == k) return it->value;
  return 0.0;
}

void AffineKernel::evaluate_into(std::span<const double> mu, Matrix& out) const {
  out = base_;
  const std::size_t n = base_.n;
  for (const auto& e : coeff_) out.a[e.from * n + e.to] += e.value * mu[e.law];
}

void AffineKernel::coeff_apply(std::span<const double> w, Matrix& out) const {
  const std::size_t n = base_.n;
  out.n = n;
  out.a.assign(n * n, 0.0);
  for (const auto& e : coeff_) out.a[e.from * n + e.to] += e.value * w[e.law];
}

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case ViolationKind::base_row_sum:
      os << "base row " << x + 1 << " sums to 1" << (magnitude >= 0 ? "+" : "") << magnitude;
      break;
    case ViolationKind::coeff_row_sum:
      os << "row-sum dependence: coefficients of row " << x + 1 << " on law state " << k + 1
         << " sum to " << magnitude << " instead of 0";
      break;
    case ViolationKind::negative_entry:
      os << "negative entry: P(" << x + 1 << "," << j + 1 << ") = " << magnitude << " at vertex law "
         << k + 1;
      break;
  }
  return os.str();
}

std::vector<std::string> ValidationReport::describe() const {
  std::vector<std::string> out;
  for (const auto& v : violations) out.push_back(v.describe());
  return out;
}

ValidationReport validate(const AffineKernel& k) {
  ValidationReport report;
  const std::size_t m = k.states();
  for (std::size_t x = 0; x < m; ++x) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += k.base()(x, j);
    if (std::abs(sum - 1.0) > kKernelTolerance)
      report.violations.push_back({ViolationKind::base_row_sum, x, 0, 0, sum - 1.0});
  }
  std::vector<double> row_dependence(m * m, 0.0);
  for (const auto& e : k.coeff()) row_dependence[e.from * m + e.law] += e.value;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t kk = 0; kk < m; ++kk)
      if (std::abs(row_dependence[x * m + kk]) > kKernelTolerance)
        report.violations.push_back({ViolationKind::coeff_row_sum, x, 0, kk, row_dependence[x * m + kk]});
  // P at vertex e_k is base + coeff[.][.][k]; report the worst vertex per entry.
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t j = 0; j < m; ++j) {
      double worst = k.base()(x, j) + k.coeff(x, j, 0);
      std::size_t worst_k = 0;
      for (std::size_t kk = 1; kk < m; ++kk) {
        const double v = k.base()(x, j) + k.coeff(x, j, kk);
        if (v < worst) {
          worst = v;
          worst_k = kk;
        }
      }
      if (worst < -kKernelTolerance)
        report.violations.push_back({ViolationKind::negative_entry, x, j, worst_k, worst});
    }
  return report;
}

void require_valid(const AffineKernel& k) {
  auto report = validate(k);
  if (!report.ok()) throw ValidationError("kernel is not a transition kernel for every law", report.describe());
}

std::uint64_t kernel_fingerprint(const AffineKernel& k) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(k.states());
  for (double v : k.base().a) mix(std::bit_cast<std::uint64_t>(v));
  for (const auto& e : k.coeff()) {
    mix(e.from);
    mix(e.to);
    mix(e.law);
    mix(std::bit_cast<std::uint64_t>(e.value));
  }
  return h;
}

Distribution EvaluatedKernel::row(std::size_t x) const {
  auto r = rows.row(x);
  return Distribution(std::vector<double>(r.begin(), r.end()));
}

EvaluatedKernel evaluate(const AffineKernel& k, const Distribution& mu) {
  check_dims(k, mu.size());
  EvaluatedKernel out{k.space(), {}};
  k.evaluate_into(mu.weights(), out.rows);
  return out;
}

void push_law(const Matrix& rows, std::span<const double> mu, std::span<double> out) {
  const std::size_t n = rows.n;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = mu[i];
    if (w == 0.0) continue;
    const double* r = rows.a.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += w * r[j];
  }
}

Distribution step(const AffineKernel& k, const Distribution& mu) {
  check_dims(k, mu.size());
  Matrix p;
  k.evaluate_into(mu.weights(), p);
  std::vector<double> next(k.states());
  push_law(p, mu.weights(), next);
  return Distribution(std::move(next));
}

void k_step_into(const AffineKernel& k, std::span<const double> mu, std::size_t steps, Matrix& out) {
  const std::size_t m = k.states();
  std::vector<double> law(mu.begin(), mu.end()), next(m);
  Matrix p, acc;
  k.evaluate_into(law, p);
  out = p;
  for (std::size_t i = 1; i < steps; ++i) {
    push_law(p, law, next);
    law.swap(next);
    k.evaluate_into(law, p);
    multiply_into(out, p, acc);
    std::swap(out, acc);
  }
}

EvaluatedKernel k_step(const AffineKernel& k, const Distribution& mu, std::size_t steps) {
  if (steps == 0) throw UsageError("k_step requires at least one step");
  check_dims(k, mu.size());
  EvaluatedKernel out{k.space(), {}};
  k_step_into(k, mu.weights(), steps, out.rows);
  return out;
}

EvaluatedKernel two_step(const AffineKernel& k, const Distribution& mu) { return k_step(k, mu, 2); }

void k_step_jacobian(const AffineKernel& k, std::span<const double> mu, std::size_t steps,
                     std::vector<double>& jac) {
  const std::size_t m = k.states();
  // Orbit of laws and the evaluated factors along it.
  std::vector<std::vector<double>> laws(steps, std::vector<double>(m));
  std::vector<Matrix> factors(steps);
  std::copy(mu.begin(), mu.end(), laws[0].begin());
  for (std::size_t i = 0; i < steps; ++i) {
    k.evaluate_into(laws[i], factors[i]);
    if (i + 1 < steps) push_law(factors[i], laws[i], laws[i + 1]);
  }
  // Prefix products M_i = P_0 ... P_i.
  std::vector<Matrix> prefix(steps);
  prefix[0] = factors[0];
  for (std::size_t i = 1; i < steps; ++i) multiply_into(prefix[i - 1], factors[i], prefix[i]);

  jac.assign(m * m * m, 0.0);
  std::vector<double> dlaw(m), dnext(m), tmp(m);
  Matrix dfactor, dacc, scratch;
  for (std::size_t dir = 0; dir < m; ++dir) {
    std::fill(dlaw.begin(), dlaw.end(), 0.0);
    dlaw[dir] = 1.0;
    for (std::size_t i = 0; i < steps; ++i) {
      k.coeff_apply(dlaw, dfactor);
      // dM_i = dM_{i-1} P_i + M_{i-1} dP_i
      if (i == 0) {
        dacc = dfactor;
      } else {
        multiply_into(dacc, factors[i], scratch);
        multiply_add(prefix[i - 1], dfactor, scratch);
        std::swap(dacc, scratch);
      }
      if (i + 1 < steps) {
        // d(mu P_mu) = dmu P_mu + mu dP
        push_law(factors[i], dlaw, dnext);
        push_law(dfactor, laws[i], tmp);
        for (std::size_t j = 0; j < m; ++j) dnext[j] += tmp[j];
        dlaw.swap(dnext);
      }
    }
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t j = 0; j < m; ++j) jac[(x * m + j) * m + dir] = dacc.a[x * m + j];
  }
}

}  // namespace nlmc
