#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nlmc/kernels.hpp"

namespace nlmc {

/// One coefficient line of a spec file, with 1-based indices.
struct SpecCoeff {
  std::size_t x = 1;
  std::size_t j = 1;
  std::size_t k = 1;
  double value = 0.0;
  friend bool operator==(const SpecCoeff&, const SpecCoeff&) = default;
};

/// On-disk kernel description:
///
///   {"name": "...", "states": m,
///    "base": [[...], ...],
///    "coeff": [{"x": 1, "j": 2, "k": 1, "value": 0.4}, ...]}
struct KernelSpecFile {
  std::string name;
  std::size_t states = 0;
  std::vector<std::vector<double>> base;
  std::vector<SpecCoeff> coeff;
  friend bool operator==(const KernelSpecFile&, const KernelSpecFile&) = default;
};

/// Strict parse: unknown or duplicate fields, wrong types and out-of-range
/// indices are errors (ParseError, with line and column for syntax errors).
/// The resulting kernel is validated; ValidationError lists the violations.
KernelSpecFile parse_spec(std::string_view text);

/// As parse_spec but without the kernel validation step.
KernelSpecFile parse_spec_unvalidated(std::string_view text);

std::string serialize_spec(const KernelSpecFile& spec);

AffineKernel to_kernel(const KernelSpecFile& spec);
KernelSpecFile to_spec(const AffineKernel& k, std::string name);

}  // namespace nlmc
