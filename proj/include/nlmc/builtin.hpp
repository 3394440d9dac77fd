#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nlmc/kernels.hpp"

namespace nlmc {

/// The two four-state law-dependent chains used throughout the tests and the
/// CLI. Both are generated from gamma rather than stored.
enum class BuiltinId { example1, example2 };

std::string_view to_string(BuiltinId id);
BuiltinId builtin_from_string(std::string_view name);

/// Open gamma interval for which the chain is defined: (0, 0.25) for
/// example1, (0, 0.5) for example2.
struct GammaRange {
  double lower;
  double upper;
  bool contains(double gamma) const { return gamma > lower && gamma < upper; }
};
GammaRange gamma_range(BuiltinId id);

/// Row 1 leans towards states {1,2} in proportion to mu(1); rows 2-4 are
/// fixed near-deterministic pairings. Unchecked: any gamma with a valid
/// kernel is accepted (gamma = 0 gives the law-independent limit).
AffineKernel example1_kernel(double gamma);

/// Row 1 = (0, gamma mu(1), 0.5 - gamma mu(1), 0.5); rows 2-4 fixed.
AffineKernel example2_kernel(double gamma);

/// Checked constructor; throws UsageError when gamma is outside gamma_range(id).
AffineKernel make_builtin(BuiltinId id, double gamma);

/// Coefficient values stated in the literature for each example. Used to
/// annotate analysis output when computed values disagree.
struct ReferenceValues {
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> alpha2;
  std::optional<double> alpha2_upper;  // stated as an interval upper end
  std::optional<double> lambda2;       // stated as equal
  std::optional<double> lambda2_max;   // stated as an upper bound only
};
ReferenceValues reference_values(BuiltinId id, double gamma);

}  // namespace nlmc
