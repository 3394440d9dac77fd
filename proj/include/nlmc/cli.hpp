#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlmc/builtin.hpp"
#include "nlmc/contraction.hpp"

namespace nlmc::cli {

inline constexpr std::string_view kToolName = "nlmc";
inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // audit violation or internal error
  kUsage = 2,
  kValidation = 3,
  kHypothesis = 4,
  kNonConvergence = 5,
  kIo = 6,
};

enum class Command { validate, analyze, iterate, invariant, audit, simulate, examples };
enum class Format { csv, json };
enum class StartsMode { vertices, uniform, file };

std::string_view to_string(Command c);

struct KernelSource {
  std::optional<std::string> spec_path;
  std::optional<BuiltinId> builtin;
  std::optional<double> gamma;
};

/// Everything that determines a run's output.
struct RunManifest {
  Command command = Command::analyze;
  KernelSource source;
  SearchConfig search;
  std::optional<std::size_t> steps;
  StartsMode starts = StartsMode::vertices;
  std::optional<std::string> starts_file;
  double tol = 1e-13;
  std::size_t max_iters = 100'000;
  std::vector<std::size_t> particles{100, 1000, 10000};
  std::size_t replicas = 20;
  std::uint64_t seed = 1;
  std::optional<std::string> mu0;
  std::optional<std::string> nu0;
  Format format = Format::csv;
  std::optional<std::string> out;
};

/// Parses arguments (without the program name) and runs the command. Output
/// goes to `--out` or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed manifest.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

}  // namespace nlmc::cli
