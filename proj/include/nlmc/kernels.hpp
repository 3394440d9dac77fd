#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlmc/measures.hpp"

namespace nlmc {

/// Dense row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(std::size_t size, double fill = 0.0) : n(size), a(size * size, fill) {}
  static Matrix identity(std::size_t size);

  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  std::span<const double> row(std::size_t i) const { return {a.data() + i * n, n}; }
  std::span<double> row(std::size_t i) { return {a.data() + i * n, n}; }
};

Matrix operator*(const Matrix& lhs, const Matrix& rhs);

/// Nonzero entry c[from][to][law] of the law-coefficient tensor (0-based).
struct CoeffEntry {
  std::size_t from;
  std::size_t to;
  std::size_t law;
  double value;
  friend bool operator==(const CoeffEntry&, const CoeffEntry&) = default;
};

/// Transition kernel depending affinely on the current law:
///
///   P_mu(x, j) = base[x][j] + sum_k coeff[x][j][k] * mu_k.
///
/// Coefficients are kept as a sorted sparse list; entries with magnitude
/// below 1e-15 are dropped on ingest and duplicates are summed.
class AffineKernel {
 public:
  AffineKernel(std::size_t states, Matrix base, std::vector<CoeffEntry> coeff);

  std::size_t states() const noexcept { return base_.n; }
  StateSpace space() const { return StateSpace(base_.n); }
  const Matrix& base() const noexcept { return base_; }
  std::span<const CoeffEntry> coeff() const noexcept { return coeff_; }
  double coeff(std::size_t x, std::size_t j, std::size_t k) const;
  bool law_independent() const noexcept { return coeff_.empty(); }

  /// rows[x][j] for an arbitrary weight vector (no checks; hot path).
  void evaluate_into(std::span<const double> mu, Matrix& out) const;
  /// out = sum_k coeff[.][.][k] * w_k, the derivative of P along w.
  void coeff_apply(std::span<const double> w, Matrix& out) const;

  friend bool operator==(const AffineKernel&, const AffineKernel&) = default;

 private:
  Matrix base_;
  std::vector<CoeffEntry> coeff_;
};

enum class ViolationKind { base_row_sum, coeff_row_sum, negative_entry };

struct Violation {
  ViolationKind kind;
  std::size_t x;  // 0-based
  std::size_t j;  // 0-based; unused for row sums
  std::size_t k;  // 0-based law index; unused for base_row_sum
  double magnitude;
  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::vector<std::string> describe() const;
};

inline constexpr double kKernelTolerance = 1e-12;

/// Checks that P_mu is a transition kernel for every law mu: unit base row
/// sums, zero coefficient row sums, nonnegative entries at every vertex.
ValidationReport validate(const AffineKernel& k);

/// Throws ValidationError listing violations when validate(k) is not ok.
void require_valid(const AffineKernel& k);

/// FNV-1a hash of the kernel's size, base and coefficient bit patterns.
std::uint64_t kernel_fingerprint(const AffineKernel& k);

/// Row-stochastic matrix P_mu for a fixed law.
struct EvaluatedKernel {
  StateSpace space;
  Matrix rows;
  Distribution row(std::size_t x) const;
};

EvaluatedKernel evaluate(const AffineKernel& k, const Distribution& mu);

/// One step of the law: mu P_mu.
Distribution step(const AffineKernel& k, const Distribution& mu);

/// Q_mu = P_mu * P_{mu P_mu}: the second factor uses the evolved law.
EvaluatedKernel two_step(const AffineKernel& k, const Distribution& mu);

/// steps-step kernel P_mu P_{mu_1} ... P_{mu_{steps-1}} along the law orbit.
EvaluatedKernel k_step(const AffineKernel& k, const Distribution& mu, std::size_t steps);

/// Raw-vector forms used by the searches. `laws` is scratch space.
void push_law(const Matrix& rows, std::span<const double> mu, std::span<double> out);
void k_step_into(const AffineKernel& k, std::span<const double> mu, std::size_t steps, Matrix& out);

/// Jacobian of Q^(steps)_mu with respect to mu for the polynomial extension:
/// jac[(x * m + j) * m + k] = d Q(x, j) / d mu_k.
void k_step_jacobian(const AffineKernel& k, std::span<const double> mu, std::size_t steps,
                     std::vector<double>& jac);

}  // namespace nlmc
