#include "nlmc/builtin.hpp"

#include <sstream>

#include "nlmc/errors.hpp"

namespace nlmc {

std::string_view to_string(BuiltinId id) {
  switch (id) {
    case BuiltinId::example1:
      return "example1";
    case BuiltinId::example2:
      return "example2";
  }
  return "unknown";
}

BuiltinId builtin_from_string(std::string_view name) {
  if (name == "example1") return BuiltinId::example1;
  if (name == "example2") return BuiltinId::example2;
  throw UsageError("unknown builtin '" + std::string(name) + "' (expected example1 or example2)");
}

GammaRange gamma_range(BuiltinId id) {
  return id == BuiltinId::example1 ? GammaRange{0.0, 0.25} : GammaRange{0.0, 0.5};
}

AffineKernel example1_kernel(double gamma) {
  Matrix base(4);
  const double rows[4][4] = {{0.001, 0.001, 0.499, 0.499},
                             {0.499, 0.499, 0.001, 0.001},
                             {0.499, 0.001, 0.499, 0.001},
                             {0.001, 0.499, 0.001, 0.499}};
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t j = 0; j < 4; ++j) base(x, j) = rows[x][j];
  std::vector<CoeffEntry> coeff = {
      {0, 0, 0, gamma}, {0, 1, 0, gamma}, {0, 2, 0, -gamma}, {0, 3, 0, -gamma}};
  return AffineKernel(4, std::move(base), std::move(coeff));
}

AffineKernel example2_kernel(double gamma) {
  Matrix base(4);
  const double rows[4][4] = {
      {0.0, 0.0, 0.5, 0.5}, {0.5, 0.5, 0.0, 0.0}, {0.5, 0.0, 0.5, 0.0}, {0.0, 0.5, 0.0, 0.5}};
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t j = 0; j < 4; ++j) base(x, j) = rows[x][j];
  std::vector<CoeffEntry> coeff = {{0, 1, 0, gamma}, {0, 2, 0, -gamma}};
  return AffineKernel(4, std::move(base), std::move(coeff));
}

AffineKernel make_builtin(BuiltinId id, double gamma) {
  const auto range = gamma_range(id);
  if (!range.contains(gamma)) {
    std::ostringstream os;
    os << to_string(id) << " requires " << range.lower << " < gamma < " << range.upper << ", got " << gamma;
    throw UsageError(os.str());
  }
  return id == BuiltinId::example1 ? example1_kernel(gamma) : example2_kernel(gamma);
}

ReferenceValues reference_values(BuiltinId id, double gamma) {
  ReferenceValues ref;
  if (id == BuiltinId::example1) {
    ref.alpha = 0.004;
    ref.lambda = gamma;
    ref.alpha2 = 0.503992;
    ref.lambda2_max = gamma;
  } else {
    ref.alpha = 0.0;
    ref.lambda = gamma;
    ref.alpha2 = 0.5;
    ref.alpha2_upper = 0.5 + 0.25 * gamma;
    ref.lambda2 = gamma / 2.0;
  }
  return ref;
}

}  // namespace nlmc
