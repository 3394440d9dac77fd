#include "nlmc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlmc/dynamics.hpp"
#include "nlmc/errors.hpp"
#include "nlmc/particles.hpp"
#include "nlmc/spec_io.hpp"

namespace nlmc::cli {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::validate:
      return "validate";
    case Command::analyze:
      return "analyze";
    case Command::iterate:
      return "iterate";
    case Command::invariant:
      return "invariant";
    case Command::audit:
      return "audit";
    case Command::simulate:
      return "simulate";
    case Command::examples:
      return "examples";
  }
  return "analyze";
}

namespace {

using ojson = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string join(std::span<const double> w, char sep) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += sep;
    s += num(w[i]);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  f.flush();
  if (!f) throw IoError("error while writing " + path);
}

struct LoadedKernel {
  AffineKernel kernel;
  std::string name;
  std::optional<BuiltinId> builtin;
  double gamma = 0.0;
};

void check_source(const KernelSource& s) {
  if (s.spec_path && s.builtin) throw UsageError("use either --spec or --builtin, not both");
  if (!s.spec_path && !s.builtin) throw UsageError("a kernel is required: pass --spec <path> or --builtin <name>");
  if (s.builtin && !s.gamma) throw UsageError("--builtin requires --gamma");
  if (s.spec_path && s.gamma) throw UsageError("--gamma applies to --builtin kernels only");
}

LoadedKernel load_kernel(const KernelSource& s) {
  check_source(s);
  if (s.builtin) {
    return {make_builtin(*s.builtin, *s.gamma), std::string(to_string(*s.builtin)), s.builtin, *s.gamma};
  }
  const auto spec = parse_spec(read_file(*s.spec_path));
  return {to_kernel(spec), spec.name, std::nullopt, 0.0};
}

// "uniform", "e<k>" (1-based vertex) or comma-separated weights.
Distribution parse_law(const std::string& text, std::size_t m, const char* flag) {
  if (text == "uniform") return Distribution::uniform(m);
  if (!text.empty() && text[0] == 'e') {
    std::size_t k = 0;
    const auto res = std::from_chars(text.data() + 1, text.data() + text.size(), k);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || k < 1 || k > m)
      throw UsageError(std::string(flag) + ": expected e1..e" + std::to_string(m));
    return Distribution::vertex(m, k - 1);
  }
  std::vector<double> w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw UsageError(std::string(flag) + ": bad weight \"" + item + "\"");
    w.push_back(v);
  }
  if (w.size() != m)
    throw UsageError(std::string(flag) + ": expected " + std::to_string(m) + " weights, got " + std::to_string(w.size()));
  try {
    return Distribution(std::move(w));
  } catch (const DistributionError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

std::vector<Distribution> load_starts(const RunManifest& m, std::size_t states) {
  switch (m.starts) {
    case StartsMode::vertices:
      return default_starts(states);
    case StartsMode::uniform:
      return {Distribution::uniform(states)};
    case StartsMode::file: {
      if (!m.starts_file) throw UsageError("--starts file requires --starts-file <path>");
      const std::string text = read_file(*m.starts_file);
      ojson doc;
      try {
        doc = ojson::parse(text);
      } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("starts file: ") + e.what());
      }
      if (!doc.is_array() || doc.empty()) throw UsageError("starts file: expected a non-empty array of laws");
      std::vector<Distribution> out;
      for (const auto& row : doc) {
        if (!row.is_array() || row.size() != states)
          throw UsageError("starts file: every law needs " + std::to_string(states) + " weights");
        std::vector<double> w;
        for (const auto& v : row) {
          if (!v.is_number()) throw UsageError("starts file: weights must be numbers");
          w.push_back(v.get<double>());
        }
        try {
          out.emplace_back(std::move(w));
        } catch (const DistributionError& e) {
          throw UsageError(std::string("starts file: ") + e.what());
        }
      }
      return out;
    }
  }
  return default_starts(states);
}

std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }
std::string_view to_string(StartsMode s) {
  switch (s) {
    case StartsMode::vertices:
      return "vertices";
    case StartsMode::uniform:
      return "uniform";
    case StartsMode::file:
      return "file";
  }
  return "vertices";
}

bool uses_search(Command c) { return c == Command::analyze || c == Command::audit; }
bool uses_starts(Command c) { return c == Command::invariant || c == Command::audit; }

std::size_t default_steps(Command c) {
  switch (c) {
    case Command::analyze:
      return 2;
    case Command::simulate:
      return 30;
    default:
      return 40;
  }
}

ojson search_json(const SearchConfig& s) {
  return ojson{{"grid", s.denominator},
               {"min_step", s.min_step},
               {"pair_floor", s.pair_floor},
               {"eval_cap", s.eval_cap},
               {"tol_bracket", s.tolerance}};
}

// Reproducibility header: tool version and the manifest echo.
ojson meta_json(const RunManifest& m, const std::optional<LoadedKernel>& k) {
  ojson meta;
  meta["tool"] = std::string(kToolName) + " " + std::string(kVersion);
  meta["command"] = std::string(to_string(m.command));
  ojson src;
  if (m.source.builtin) {
    src["source"] = "builtin";
    src["name"] = std::string(to_string(*m.source.builtin));
    if (m.source.gamma) src["gamma"] = *m.source.gamma;
  } else if (m.source.spec_path) {
    src["source"] = "spec";
    src["path"] = *m.source.spec_path;
    if (k) src["name"] = k->name;
  }
  if (k) src["hash"] = hex64(kernel_fingerprint(k->kernel));
  if (!src.empty()) meta["kernel"] = src;
  if (uses_search(m.command)) meta["search"] = search_json(m.search);
  if (m.command != Command::validate && m.command != Command::invariant && m.command != Command::examples)
    meta["steps"] = m.steps.value_or(default_steps(m.command));
  if (uses_starts(m.command) && !(m.command == Command::audit && m.nu0)) {
    meta["starts"] = std::string(to_string(m.starts));
    if (m.starts == StartsMode::file && m.starts_file) meta["starts_file"] = *m.starts_file;
    meta["tol"] = m.tol;
    meta["max_iters"] = m.max_iters;
  }
  if (m.command == Command::iterate || m.command == Command::audit || m.command == Command::simulate)
    meta["mu0"] = m.mu0.value_or("e1");
  if (m.command == Command::audit && m.nu0) meta["nu0"] = *m.nu0;
  if (m.command == Command::simulate) {
    meta["particles"] = m.particles;
    meta["replicas"] = m.replicas;
    meta["seed"] = m.seed;
  }
  meta["format"] = std::string(to_string(m.format));
  if (m.out) meta["out"] = *m.out;
  return meta;
}

std::string scalar_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + scalar_text(v[i]);
    return s;
  }
  return v.dump();
}

void csv_header(std::ostream& os, const ojson& meta) {
  for (const auto& [key, value] : meta.items()) {
    os << "# " << key << ":";
    if (value.is_object()) {
      for (const auto& [k2, v2] : value.items()) os << " " << k2 << "=" << scalar_text(v2);
    } else {
      os << " " << scalar_text(value);
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------

ojson law_json(const Distribution& d) { return ojson(d.vector()); }

ojson report_json(const CoefficientReport& r) {
  ojson j;
  j["steps"] = r.steps;
  j["certification"] = std::string(to_string(r.certification));
  j["alpha"] = {{"estimate", r.alpha},
                {"lower", r.alpha_bracket.lower},
                {"upper", r.alpha_bracket.upper},
                {"witness",
                 {{"mu", law_json(r.alpha_witness.mu)},
                  {"nu", law_json(r.alpha_witness.nu)},
                  {"x", r.alpha_witness.x + 1},
                  {"y", r.alpha_witness.y + 1},
                  {"distance", r.alpha_witness.distance}}}};
  j["lambda"] = {{"estimate", r.lambda},
                 {"lower", r.lambda_bracket.lower},
                 {"upper", r.lambda_bracket.upper},
                 {"witness",
                  {{"mu", law_json(r.lambda_witness.mu)},
                   {"nu", law_json(r.lambda_witness.nu)},
                   {"x", r.lambda_witness.x + 1},
                   {"infinitesimal", r.lambda_witness.infinitesimal},
                   {"ratio", r.lambda_witness.ratio}}}};
  j["regime"] = std::string(to_string(r.regime));
  if (r.certification == Certification::bracketed) {
    j["stats"] = {{"grid_points", r.stats.grid_points},
                  {"grid_pairs", r.stats.grid_pairs},
                  {"cells", r.stats.cells},
                  {"cell_evaluations", r.stats.cell_evaluations},
                  {"refine_evaluations", r.stats.refine_evaluations},
                  {"truncated", r.stats.truncated}};
  }
  j["kernel_hash"] = hex64(r.kernel_hash);
  return j;
}

ojson call_json(const RegimeCall& c) {
  return {{"certified", std::string(to_string(c.certified))},
          {"indicative", std::string(to_string(c.indicative))},
          {"guaranteed", c.guaranteed}};
}

// Disagreements between computed coefficients and the values stated in the
// literature for the built-in examples.
std::vector<std::string> discrepancy_notes(const LoadedKernel& k, const CoefficientReport& r1,
                                           const CoefficientReport& rk) {
  std::vector<std::string> notes;
  if (!k.builtin) return notes;
  const ReferenceValues ref = reference_values(*k.builtin, k.gamma);
  const std::string who = std::string(to_string(*k.builtin));
  if (ref.alpha && std::abs(*ref.alpha - r1.alpha) > 1e-12)
    notes.push_back("discrepancy: " + who + " alpha computed " + num(r1.alpha) + ", published value " +
                    num(*ref.alpha));
  if (ref.lambda && std::abs(*ref.lambda - r1.lambda) > 1e-12) {
    const auto& w = r1.lambda_witness;
    notes.push_back("discrepancy: " + who + " lambda computed " + num(r1.lambda) + " (exact vertex maximum, ratio " +
                    num(w.ratio) + " at mu=(" + join(w.mu.weights(), ';') + ") nu=(" + join(w.nu.weights(), ';') +
                    ") x=" + std::to_string(w.x + 1) + "), published value " + num(*ref.lambda) +
                    " (gamma); reporting the computed value");
  }
  if (rk.steps != 2) return notes;
  if (ref.alpha2 && !rk.alpha_bracket.contains(*ref.alpha2))
    notes.push_back("discrepancy: " + who + " alpha2 published value " + num(*ref.alpha2) +
                    " lies outside the certified bracket [" + num(rk.alpha_bracket.lower) + ", " +
                    num(rk.alpha_bracket.upper) + "]");
  if (ref.lambda2 && !rk.lambda_bracket.contains(*ref.lambda2))
    notes.push_back("discrepancy: " + who + " lambda2 published value " + num(*ref.lambda2) +
                    " lies outside the certified bracket [" + num(rk.lambda_bracket.lower) + ", " +
                    num(rk.lambda_bracket.upper) + "]");
  if (ref.lambda2_max && rk.lambda_bracket.lower > *ref.lambda2_max)
    notes.push_back("discrepancy: " + who + " lambda2 lower end " + num(rk.lambda_bracket.lower) +
                    " exceeds the published upper bound " + num(*ref.lambda2_max));
  return notes;
}

void report_csv_rows(std::ostream& os, const CoefficientReport& r) {
  const auto cert = std::string(to_string(r.certification));
  const auto& a = r.alpha_witness;
  os << r.steps << ",alpha," << num(r.alpha) << "," << num(r.alpha_bracket.lower) << ","
     << num(r.alpha_bracket.upper) << "," << cert << "," << a.x + 1 << "," << a.y + 1 << ","
     << join(a.mu.weights(), ';') << "," << join(a.nu.weights(), ';') << "\n";
  const auto& l = r.lambda_witness;
  os << r.steps << ",lambda," << num(r.lambda) << "," << num(r.lambda_bracket.lower) << ","
     << num(r.lambda_bracket.upper) << "," << cert << "," << l.x + 1 << ",," << join(l.mu.weights(), ';') << ","
     << join(l.nu.weights(), ';') << "\n";
}

// ---------------------------------------------------------------------------

std::string cmd_validate(const RunManifest& m, const ojson& meta_base, int& code) {
  check_source(m.source);
  std::optional<AffineKernel> kernel;
  if (m.source.builtin) {
    kernel = make_builtin(*m.source.builtin, *m.source.gamma);
  } else {
    kernel = to_kernel(parse_spec_unvalidated(read_file(*m.source.spec_path)));
  }
  const ValidationReport rep = validate(*kernel);
  code = rep.ok() ? kOk : kValidation;
  auto kind = [](ViolationKind k) -> std::string {
    switch (k) {
      case ViolationKind::base_row_sum:
        return "base_row_sum";
      case ViolationKind::coeff_row_sum:
        return "coeff_row_sum";
      case ViolationKind::negative_entry:
        return "negative_entry";
    }
    return "";
  };
  auto uses_j = [](ViolationKind k) { return k == ViolationKind::negative_entry; };
  auto uses_k = [](ViolationKind k) { return k != ViolationKind::base_row_sum; };
  std::ostringstream os;
  ojson meta = meta_base;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    doc["ok"] = rep.ok();
    ojson vs = ojson::array();
    for (const auto& v : rep.violations) {
      ojson row = {{"kind", kind(v.kind)}, {"x", v.x + 1}};
      row["j"] = uses_j(v.kind) ? ojson(v.j + 1) : ojson(nullptr);
      row["k"] = uses_k(v.kind) ? ojson(v.k + 1) : ojson(nullptr);
      row["magnitude"] = v.magnitude;
      row["description"] = v.describe();
      vs.push_back(std::move(row));
    }
    doc["violations"] = vs;
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "# ok: " << (rep.ok() ? "true" : "false") << "\n";
    os << "kind,x,j,k,magnitude\n";
    for (const auto& v : rep.violations)
      os << kind(v.kind) << "," << v.x + 1 << "," << (uses_j(v.kind) ? std::to_string(v.j + 1) : "") << ","
         << (uses_k(v.kind) ? std::to_string(v.k + 1) : "") << "," << num(v.magnitude) << "\n";
  }
  return os.str();
}

std::string cmd_analyze(const RunManifest& m, const LoadedKernel& k, const ojson& meta) {
  const std::size_t steps = m.steps.value_or(2);
  if (steps < 2) throw UsageError("analyze: --steps must be at least 2 (one-step coefficients are always reported)");
  const CoefficientReport r1 = coefficients_one_step(k.kernel);
  const CoefficientReport rk = coefficients_k_step(k.kernel, steps, m.search);
  const RegimeSummary cls = classify(r1, rk);
  const auto notes = discrepancy_notes(k, r1, rk);
  std::ostringstream os;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    doc["one_step"] = report_json(r1);
    doc["multi_step"] = report_json(rk);
    doc["classification"] = {{"one_step", call_json(cls.one_step)},
                             {"multi_step", call_json(cls.multi_step)},
                             {"conclusion", cls.conclusion}};
    doc["notes"] = notes;
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "steps,coefficient,estimate,lower,upper,certification,x,y,mu,nu\n";
    report_csv_rows(os, r1);
    report_csv_rows(os, rk);
    auto call = [](const RegimeCall& c) {
      return "certified=" + std::string(to_string(c.certified)) + " indicative=" +
             std::string(to_string(c.indicative)) + " guaranteed=" + (c.guaranteed ? "true" : "false");
    };
    os << "# regime one-step: " << call(cls.one_step) << "\n";
    os << "# regime " << steps << "-step: " << call(cls.multi_step) << "\n";
    os << "# conclusion: " << cls.conclusion << "\n";
    if (rk.stats.truncated) os << "# note: evaluation budget exhausted; brackets are valid but may be wider\n";
    for (const auto& n : notes) os << "# note: " << n << "\n";
  }
  return os.str();
}

std::string cmd_iterate(const RunManifest& m, const LoadedKernel& k, const ojson& meta) {
  const std::size_t n = m.steps.value_or(default_steps(m.command));
  const Distribution mu0 = parse_law(m.mu0.value_or("e1"), k.kernel.states(), "--mu0");
  const Trajectory t = iterate(k.kernel, mu0, n);
  std::ostringstream os;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    ojson laws = ojson::array();
    for (const auto& l : t.laws) laws.push_back(law_json(l));
    doc["laws"] = laws;
    doc["tv_deltas"] = t.tv_deltas;
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "n";
    for (std::size_t x = 0; x < k.kernel.states(); ++x) os << ",p" << x + 1;
    os << ",tv_next\n";
    for (std::size_t i = 0; i < t.laws.size(); ++i) {
      os << i << "," << join(t.laws[i].weights(), ',') << ",";
      if (i < t.tv_deltas.size()) os << num(t.tv_deltas[i]);
      os << "\n";
    }
  }
  return os.str();
}

std::string cmd_invariant(const RunManifest& m, const LoadedKernel& k, const ojson& meta) {
  const auto starts = load_starts(m, k.kernel.states());
  const InvariantResult r = invariant(k.kernel, starts, m.tol, m.max_iters);
  std::ostringstream os;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    doc["pi"] = law_json(r.pi);
    doc["residual"] = r.residual;
    doc["iterations"] = r.iterations;
    doc["max_pairwise_gap"] = r.max_pairwise_gap;
    doc["unique"] = r.unique;
    ojson runs = ojson::array();
    for (std::size_t i = 0; i < r.starts.size(); ++i)
      runs.push_back({{"start", law_json(r.starts[i])}, {"limit", law_json(r.limits[i])}});
    doc["starts"] = runs;
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "iterations,residual,max_pairwise_gap,unique";
    for (std::size_t x = 0; x < k.kernel.states(); ++x) os << ",pi" << x + 1;
    os << "\n";
    os << r.iterations << "," << num(r.residual) << "," << num(r.max_pairwise_gap) << ","
       << (r.unique ? "true" : "false") << "," << join(r.pi.weights(), ',') << "\n";
  }
  return os.str();
}

std::string cmd_audit(const RunManifest& m, const LoadedKernel& k, const ojson& meta, int& code) {
  const std::size_t n_max = m.steps.value_or(default_steps(m.command));
  const std::size_t states = k.kernel.states();
  const Distribution mu0 = parse_law(m.mu0.value_or("e1"), states, "--mu0");
  const CoefficientReport r1 = coefficients_one_step(k.kernel);
  const CoefficientReport r2 = coefficients_k_step(k.kernel, 2, m.search);
  const AuditConstants c = audit_constants(r2, r1);
  std::vector<BoundAudit> rows;
  std::optional<InvariantResult> inv;
  if (m.nu0) {
    rows = audit_pair(k.kernel, mu0, parse_law(*m.nu0, states, "--nu0"), r2, r1, n_max);
  } else {
    inv = invariant(k.kernel, load_starts(m, states), m.tol, m.max_iters);
    rows = audit_convergence(k.kernel, mu0, inv->pi, r2, r1, n_max);
  }
  const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const BoundAudit& a) { return a.satisfied; });
  code = all_ok ? kOk : kFailure;
  const std::string mode = m.nu0 ? "pair" : "invariant";
  const std::string straddle =
      "certified brackets meet at lambda2 = alpha2 within 1e-12; both bounds evaluated and the weaker one binds";
  std::ostringstream os;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    doc["mode"] = mode;
    doc["constants"] = {{"alpha2_lower", c.alpha2},
                        {"lambda2_upper", c.lambda2},
                        {"lambda1_upper", c.lambda1},
                        {"branch", std::string(to_string(c.branch))}};
    if (inv) doc["pi"] = law_json(inv->pi);
    ojson arr = ojson::array();
    for (const auto& a : rows)
      arr.push_back({{"n", a.n},
                     {"observed", a.observed},
                     {"bound", a.bound},
                     {"slack", a.slack},
                     {"satisfied", a.satisfied}});
    doc["audit"] = arr;
    doc["all_satisfied"] = all_ok;
    doc["notes"] = c.branch == BoundBranch::both ? ojson::array({straddle}) : ojson::array();
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "# mode: " << mode << "\n";
    os << "# constants: alpha2_lower=" << num(c.alpha2) << " lambda2_upper=" << num(c.lambda2)
       << " lambda1_upper=" << num(c.lambda1) << " branch=" << to_string(c.branch) << "\n";
    if (inv) os << "# pi: " << join(inv->pi.weights(), ',') << "\n";
    if (c.branch == BoundBranch::both) os << "# note: " << straddle << "\n";
    os << "n,observed,bound,slack,satisfied\n";
    for (const auto& a : rows)
      os << a.n << "," << num(a.observed) << "," << num(a.bound) << "," << num(a.slack) << ","
         << (a.satisfied ? "true" : "false") << "\n";
  }
  return os.str();
}

std::string cmd_simulate(const RunManifest& m, const LoadedKernel& k, const ojson& meta) {
  const std::size_t steps = m.steps.value_or(default_steps(m.command));
  const Distribution mu0 = parse_law(m.mu0.value_or("e1"), k.kernel.states(), "--mu0");
  const auto rows = law_error_curve(k.kernel, mu0, m.particles, steps, m.replicas, m.seed);
  std::ostringstream os;
  if (m.format == Format::json) {
    ojson doc;
    doc["meta"] = meta;
    ojson arr = ojson::array();
    for (const auto& r : rows)
      arr.push_back({{"N", r.n},
                     {"steps", r.steps},
                     {"mean_tv", r.mean_tv},
                     {"std_tv", r.std_tv},
                     {"replicas", r.replicas},
                     {"seed", r.seed}});
    doc["curve"] = arr;
    os << doc.dump(2) << "\n";
  } else {
    csv_header(os, meta);
    os << "N,steps,mean_tv,std_tv,replicas,seed\n";
    for (const auto& r : rows)
      os << r.n << "," << r.steps << "," << num(r.mean_tv) << "," << num(r.std_tv) << "," << r.replicas << ","
         << r.seed << "\n";
  }
  return os.str();
}

// Without --builtin, writes both examples at their default gamma into the
// directory given by --out.
int cmd_examples(const RunManifest& m, std::ostream& out) {
  if (m.source.spec_path) throw UsageError("examples: --spec is not accepted");
  if (m.source.builtin) {
    if (!m.source.gamma) throw UsageError("--builtin requires --gamma");
    const auto spec = to_spec(make_builtin(*m.source.builtin, *m.source.gamma),
                              std::string(to_string(*m.source.builtin)));
    const std::string text = serialize_spec(spec);
    if (m.out)
      write_file(*m.out, text);
    else
      out << text;
    return kOk;
  }
  if (m.source.gamma) throw UsageError("--gamma requires --builtin");
  if (!m.out) throw UsageError("examples: pass --builtin <name> --gamma <g>, or --out <directory> for both");
  std::error_code ec;
  std::filesystem::create_directories(*m.out, ec);
  if (ec) throw IoError("cannot create directory " + *m.out + ": " + ec.message());
  const std::pair<BuiltinId, double> defaults[] = {{BuiltinId::example1, 0.2}, {BuiltinId::example2, 0.4}};
  for (const auto& [id, gamma] : defaults) {
    const auto path = std::filesystem::path(*m.out) / (std::string(to_string(id)) + ".json");
    write_file(path.string(), serialize_spec(to_spec(make_builtin(id, gamma), std::string(to_string(id)))));
  }
  return kOk;
}

int dispatch(const RunManifest& m, std::ostream& out) {
  if (m.command == Command::examples) return cmd_examples(m, out);
  int code = kOk;
  std::string text;
  if (m.command == Command::validate) {
    std::optional<LoadedKernel> none;
    text = cmd_validate(m, meta_json(m, none), code);
  } else {
    const std::optional<LoadedKernel> k = load_kernel(m.source);
    const ojson meta = meta_json(m, k);
    switch (m.command) {
      case Command::analyze:
        text = cmd_analyze(m, *k, meta);
        break;
      case Command::iterate:
        text = cmd_iterate(m, *k, meta);
        break;
      case Command::invariant:
        text = cmd_invariant(m, *k, meta);
        break;
      case Command::audit:
        text = cmd_audit(m, *k, meta, code);
        break;
      case Command::simulate:
        text = cmd_simulate(m, *k, meta);
        break;
      default:
        break;
    }
  }
  if (m.out)
    write_file(*m.out, text);
  else
    out << text;
  return code;
}

}  // namespace

int run(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
  const std::string prefix = std::string(kToolName) + ": ";
  try {
    const int code = dispatch(manifest, out);
    if (code == kValidation) err << prefix << "kernel validation failed\n";
    if (code == kFailure) err << prefix << "audit found bound violations\n";
    return code;
  } catch (const ValidationError& e) {
    err << prefix << "validation error: " << e.what() << "\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << prefix << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const HypothesisError& e) {
    err << prefix << "hypothesis failure: " << e.what() << "\n";
    return kHypothesis;
  } catch (const NonConvergenceError& e) {
    err << prefix << "non-convergence: " << e.what() << "\n";
    err << "  last iterate: " << join(e.last().weights(), ',') << "\n";
    return kNonConvergence;
  } catch (const IoError& e) {
    err << prefix << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const UsageError& e) {
    err << prefix << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const CapError& e) {
    err << prefix << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DistributionError& e) {
    err << prefix << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << prefix << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << prefix << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coefficients, invariant laws, bound audits and particle simulation for law-dependent Markov chains",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunManifest m;
  std::string builtin, format = "csv", starts = "vertices";
  std::size_t steps = 0;

  struct Sub {
    Command cmd;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  auto add = [&](Command c, const char* help) {
    auto* s = app.add_subcommand(std::string(to_string(c)), help);
    subs.push_back({c, s});
    s->add_option("--builtin", builtin, "built-in kernel")->check(CLI::IsMember({"example1", "example2"}));
    s->add_option("--gamma", m.source.gamma, "parameter of the built-in kernel");
    if (c != Command::examples) s->add_option("--spec", m.source.spec_path, "kernel spec file (JSON)");
    if (c != Command::examples) s->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", m.out, c == Command::examples ? "output file, or directory when --builtin is omitted"
                                                          : "output file (default: standard output)");
    if (uses_search(c)) {
      s->add_option("--grid", m.search.denominator, "simplex grid denominator")->capture_default_str();
      s->add_option("--min-step", m.search.min_step, "smallest refinement step")->capture_default_str();
      s->add_option("--pair-floor", m.search.pair_floor, "smallest law distance in the ratio search")
          ->capture_default_str();
      s->add_option("--tol-bracket", m.search.tolerance, "target bracket width")->capture_default_str();
    }
    if (c == Command::analyze) s->add_option("--steps", steps, "multi-step count k (default 2)");
    if (c == Command::iterate || c == Command::audit) s->add_option("--steps", steps, "number of steps (default 40)");
    if (c == Command::simulate) s->add_option("--steps", steps, "number of steps (default 30)");
    if (c == Command::iterate || c == Command::audit || c == Command::simulate)
      s->add_option("--mu0", m.mu0, "initial law: e<k>, uniform, or comma-separated weights (default e1)");
    if (c == Command::audit) s->add_option("--nu0", m.nu0, "second initial law for a pairwise audit");
    if (uses_starts(c)) {
      s->add_option("--starts", starts, "multi-start set: vertices (all vertices plus uniform), uniform, file")
          ->check(CLI::IsMember({"vertices", "uniform", "file"}));
      s->add_option("--starts-file", m.starts_file, "JSON array of start laws (with --starts file)");
      s->add_option("--tol", m.tol, "fixed-point tolerance")->capture_default_str();
      s->add_option("--max-iters", m.max_iters, "iteration budget per start")->capture_default_str();
    }
    if (c == Command::simulate) {
      s->add_option("--particles", m.particles, "comma-separated particle counts")->delimiter(',')->capture_default_str();
      s->add_option("--replicas", m.replicas, "replicas per particle count")->capture_default_str();
      s->add_option("--seed", m.seed, "master seed")->capture_default_str();
    }
  };
  add(Command::validate, "check that a kernel is a transition kernel for every law");
  add(Command::analyze, "one-step and k-step coefficients with regime classification");
  add(Command::iterate, "law trajectory");
  add(Command::invariant, "invariant law by multi-start fixed-point iteration");
  add(Command::audit, "compare trajectories against the convergence bounds");
  add(Command::simulate, "mean-field particle law-error curve");
  add(Command::examples, "write built-in kernels as spec files");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; everything else is a usage error.
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  for (const auto& s : subs)
    if (s.app->parsed()) {
      m.command = s.cmd;
      if (const auto* o = s.app->get_option_no_throw("--steps"); o != nullptr && o->count() > 0) m.steps = steps;
    }
  if (!builtin.empty()) m.source.builtin = builtin_from_string(builtin);
  m.format = format == "json" ? Format::json : Format::csv;
  m.starts = starts == "uniform" ? StartsMode::uniform : starts == "file" ? StartsMode::file : StartsMode::vertices;
  if (m.particles.empty()) {
    err << kToolName << ": usage error: --particles needs at least one value\n";
    return kUsage;
  }
  return run(m, out, err);
}

}  // namespace nlmc::cli
