#include "nlmc/spec_io.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "nlmc/errors.hpp"

namespace nlmc {

namespace {

using json = nlohmann::ordered_json;

// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(where + ": unknown field \"" + key + "\"");
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

std::size_t index_field(const json& v, const std::string& where, std::size_t states) {
  if (!v.is_number_integer() || v.get<long long>() < 1 || static_cast<std::size_t>(v.get<long long>()) > states)
    throw ParseError(where + ": expected an integer index in [1, " + std::to_string(states) + "]");
  return static_cast<std::size_t>(v.get<long long>());
}

double number_field(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": expected a finite number");
  return d;
}

}  // namespace

KernelSpecFile parse_spec_unvalidated(std::string_view text) {
  // Duplicate keys are rejected through the parser callback.
  std::vector<std::set<std::string>> seen;
  auto callback = [&seen](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        seen.pop_back();
        break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second) throw ParseError("duplicate field \"" + key + "\"");
        break;
      }
      default:
        break;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), callback);
  } catch (const json::parse_error& e) {
    const auto [line, column] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError("spec " + msg, line, column);
  }

  if (!doc.is_object()) throw ParseError("spec: top level must be an object");
  allow_keys(doc, "spec", {"name", "states", "base", "coeff"});
  KernelSpecFile spec;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("spec.name: expected a string");
    spec.name = it->get<std::string>();
  }
  const json& states = require(doc, "spec", "states");
  if (!states.is_number_integer() || states.get<long long>() < 1)
    throw ParseError("spec.states: expected a positive integer");
  spec.states = static_cast<std::size_t>(states.get<long long>());

  const json& base = require(doc, "spec", "base");
  if (!base.is_array() || base.size() != spec.states)
    throw ParseError("spec.base: expected " + std::to_string(spec.states) + " rows");
  for (std::size_t x = 0; x < spec.states; ++x) {
    const std::string where = "spec.base[" + std::to_string(x + 1) + "]";
    const json& row = base[x];
    if (!row.is_array() || row.size() != spec.states)
      throw ParseError(where + ": expected " + std::to_string(spec.states) + " entries");
    std::vector<double> r;
    for (std::size_t j = 0; j < spec.states; ++j) r.push_back(number_field(row[j], where));
    spec.base.push_back(std::move(r));
  }

  const json& coeff = require(doc, "spec", "coeff");
  if (!coeff.is_array()) throw ParseError("spec.coeff: expected an array");
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    const std::string where = "spec.coeff[" + std::to_string(i + 1) + "]";
    const json& c = coeff[i];
    if (!c.is_object()) throw ParseError(where + ": expected an object");
    allow_keys(c, where, {"x", "j", "k", "value"});
    SpecCoeff e;
    e.x = index_field(require(c, where, "x"), where + ".x", spec.states);
    e.j = index_field(require(c, where, "j"), where + ".j", spec.states);
    e.k = index_field(require(c, where, "k"), where + ".k", spec.states);
    e.value = number_field(require(c, where, "value"), where + ".value");
    spec.coeff.push_back(e);
  }
  return spec;
}

KernelSpecFile parse_spec(std::string_view text) {
  KernelSpecFile spec = parse_spec_unvalidated(text);
  require_valid(to_kernel(spec));
  return spec;
}

std::string serialize_spec(const KernelSpecFile& spec) {
  json doc = json::object();
  doc["name"] = spec.name;
  doc["states"] = spec.states;
  doc["base"] = spec.base;
  json coeff = json::array();
  for (const auto& c : spec.coeff) coeff.push_back({{"x", c.x}, {"j", c.j}, {"k", c.k}, {"value", c.value}});
  doc["coeff"] = std::move(coeff);
  return doc.dump(2) + "\n";
}

AffineKernel to_kernel(const KernelSpecFile& spec) {
  Matrix base(spec.states);
  for (std::size_t x = 0; x < spec.states; ++x)
    for (std::size_t j = 0; j < spec.states; ++j) base(x, j) = spec.base.at(x).at(j);
  std::vector<CoeffEntry> coeff;
  for (const auto& c : spec.coeff) coeff.push_back({c.x - 1, c.j - 1, c.k - 1, c.value});
  return AffineKernel(spec.states, std::move(base), std::move(coeff));
}

KernelSpecFile to_spec(const AffineKernel& k, std::string name) {
  KernelSpecFile spec;
  spec.name = std::move(name);
  spec.states = k.states();
  for (std::size_t x = 0; x < k.states(); ++x) {
    const auto row = k.base().row(x);
    spec.base.emplace_back(row.begin(), row.end());
  }
  for (const auto& e : k.coeff()) spec.coeff.push_back({e.from + 1, e.to + 1, e.law + 1, e.value});
  return spec;
}

}  // namespace nlmc
