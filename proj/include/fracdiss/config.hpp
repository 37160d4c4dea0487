#pragma once

// Key-value run configuration with one section per experiment kind.
//
//   # comment            ; comment
//   [run]
//   kind = solve
//   seed = 7
//   [solve]
//   alpha = 0.75
//   L = 8pi
//
// Keys are validated against a per-kind schema: unknown keys, missing
// required keys and ill-typed or out-of-range values are rejected by name.

#include "fracdiss/error.hpp"
#include "fracdiss/rational.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace fracdiss {

enum class ConfigIssue { syntax, missing_key, type_error, unknown_key };

inline const char* to_string(ConfigIssue c) {
  switch (c) {
    case ConfigIssue::syntax: return "syntax-error";
    case ConfigIssue::missing_key: return "missing-key";
    case ConfigIssue::type_error: return "type-error";
    case ConfigIssue::unknown_key: return "unknown-key";
  }
  return "config-error";
}

class ConfigError : public Error {
public:
  ConfigError(ConfigIssue issue, std::string key, const std::string& detail)
      : Error(ErrorKind::invalid_argument,
              std::string(to_string(issue)) + ": '" + key + "'" + (detail.empty() ? "" : ": " + detail)),
        issue_(issue),
        key_(std::move(key)) {}
  [[nodiscard]] ConfigIssue issue() const noexcept { return issue_; }
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
  ConfigIssue issue_;
  std::string key_;
};

enum class ValueType { integer, real, rational, exponent, boolean, text, real_list, exponent_list };

using ConfigValue =
    std::variant<std::int64_t, double, Rational, Exponent, bool, std::string, std::vector<double>, std::vector<Exponent>>;

struct KeySpec {
  std::string name;
  ValueType type = ValueType::real;
  bool required = false;
  std::string fallback;  // default literal, empty for none
  std::function<std::string(const ConfigValue&)> check;  // returns a complaint or ""
  std::string help;
};

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

/// Reals accept inf, a trailing "pi" factor ("8pi", "pi", "0.5pi") and
/// simple fractions "3/4".
inline std::optional<double> parse_real(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s.resize(s.size() - 2);
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
  }
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const auto a = parse_real(s.substr(0, slash));
    const auto b = parse_real(s.substr(slash + 1));
    if (!a || !b || *b == 0.0 || factor != 1.0) return std::nullopt;
    return *a / *b;
  }
  double v = 0.0;
  const char* first = s.data() + (s.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  return v * factor;
}

inline std::optional<std::int64_t> parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  std::int64_t v = 0;
  const char* first = s.data() + (!s.empty() && s.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::integer: return "an integer";
    case ValueType::real: return "a real number";
    case ValueType::rational: return "a rational number";
    case ValueType::exponent: return "a rational exponent or inf";
    case ValueType::boolean: return "true or false";
    case ValueType::text: return "a word";
    case ValueType::real_list: return "a comma-separated list of reals";
    case ValueType::exponent_list: return "a comma-separated list of exponents";
  }
  return "a value";
}

inline std::optional<ConfigValue> parse_value(ValueType type, const std::string& raw) {
  try {
    switch (type) {
      case ValueType::integer:
        if (auto v = parse_integer(raw)) return ConfigValue{*v};
        return std::nullopt;
      case ValueType::real:
        if (auto v = parse_real(raw)) return ConfigValue{*v};
        return std::nullopt;
      case ValueType::rational: return ConfigValue{Rational::parse(trim(raw))};
      case ValueType::exponent: return ConfigValue{Exponent::parse(trim(raw))};
      case ValueType::boolean: {
        const auto s = trim(raw);
        if (s == "true" || s == "yes" || s == "1") return ConfigValue{true};
        if (s == "false" || s == "no" || s == "0") return ConfigValue{false};
        return std::nullopt;
      }
      case ValueType::text: {
        const auto s = trim(raw);
        if (s.empty()) return std::nullopt;
        return ConfigValue{s};
      }
      case ValueType::real_list: {
        std::vector<double> out;
        for (const auto& item : split_list(raw)) {
          const auto v = parse_real(item);
          if (!v) return std::nullopt;
          out.push_back(*v);
        }
        if (out.empty()) return std::nullopt;
        return ConfigValue{out};
      }
      case ValueType::exponent_list: {
        std::vector<Exponent> out;
        for (const auto& item : split_list(raw)) out.push_back(Exponent::parse(item));
        if (out.empty()) return std::nullopt;
        return ConfigValue{out};
      }
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return std::nullopt;
}

} // namespace detail

/// Raw sections as read from text, before schema validation.
struct RawConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;
};

inline RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    const std::string s = detail::trim(line);
    if (s.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(ConfigIssue::syntax, where, "unterminated section header");
      section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(ConfigIssue::syntax, where, "empty section name");
      raw.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(ConfigIssue::syntax, where, "expected key = value");
    const std::string key = detail::trim(std::string_view(s).substr(0, eq));
    const std::string value = detail::trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError(ConfigIssue::syntax, where, "empty key");
    if (section.empty()) throw ConfigError(ConfigIssue::syntax, key, "key outside any [section]");
    auto& sec = raw.sections[section];
    if (sec.count(key)) throw ConfigError(ConfigIssue::syntax, section + "." + key, "duplicate key");
    sec[key] = value;
  }
  return raw;
}

inline RawConfig read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

/// Applies "section.key=value" overrides on top of a raw config.
inline void apply_override(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError(ConfigIssue::syntax, assignment, "override must look like section.key=value");
  raw.sections[detail::trim(assignment.substr(0, dot))][detail::trim(assignment.substr(dot + 1, eq - dot - 1))] =
      detail::trim(assignment.substr(eq + 1));
}

namespace checks {

inline std::function<std::string(const ConfigValue&)> positive() {
  return [](const ConfigValue& v) -> std::string {
    if (auto d = std::get_if<double>(&v)) return *d > 0.0 ? "" : "must be positive";
    if (auto i = std::get_if<std::int64_t>(&v)) return *i > 0 ? "" : "must be positive";
    if (auto r = std::get_if<Rational>(&v)) return *r > Rational(0) ? "" : "must be positive";
    if (auto l = std::get_if<std::vector<double>>(&v)) {
      for (double x : *l)
        if (!(x > 0.0)) return "entries must be positive";
    }
    return "";
  };
}

inline std::function<std::string(const ConfigValue&)> at_least(double lo) {
  return [lo](const ConfigValue& v) -> std::string {
    const std::string msg = "must be >= " + detail::trim(std::to_string(lo));
    if (auto d = std::get_if<double>(&v)) return *d >= lo ? "" : msg;
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i) >= lo ? "" : msg;
    if (auto r = std::get_if<Rational>(&v)) return r->to_double() >= lo ? "" : msg;
    if (auto e = std::get_if<Exponent>(&v)) return e->to_double() >= lo ? "" : msg;
    if (auto l = std::get_if<std::vector<double>>(&v)) {
      for (double x : *l)
        if (!(x >= lo)) return "entries " + msg;
    }
    if (auto l = std::get_if<std::vector<Exponent>>(&v)) {
      for (const auto& x : *l)
        if (!(x.to_double() >= lo)) return "entries " + msg;
    }
    return "";
  };
}

inline std::function<std::string(const ConfigValue&)> finite() {
  return [](const ConfigValue& v) -> std::string {
    if (auto d = std::get_if<double>(&v)) return std::isfinite(*d) ? "" : "must be finite";
    if (auto l = std::get_if<std::vector<double>>(&v)) {
      for (double x : *l)
        if (!std::isfinite(x)) return "entries must be finite";
    }
    return "";
  };
}

inline std::function<std::string(const ConfigValue&)> one_of(std::vector<std::string> words) {
  return [words](const ConfigValue& v) -> std::string {
    const auto* s = std::get_if<std::string>(&v);
    std::string list;
    for (const auto& w : words) {
      if (s && *s == w) return "";
      list += (list.empty() ? "" : ", ") + w;
    }
    return "must be one of: " + list;
  };
}

inline std::function<std::string(const ConfigValue&)> integer_in(std::vector<std::int64_t> allowed) {
  return [allowed](const ConfigValue& v) -> std::string {
    const auto* i = std::get_if<std::int64_t>(&v);
    std::string list;
    for (auto a : allowed) {
      if (i && *i == a) return "";
      list += (list.empty() ? "" : ", ") + std::to_string(a);
    }
    return "must be one of: " + list;
  };
}

inline std::function<std::string(const ConfigValue&)> even_grid() {
  return [](const ConfigValue& v) -> std::string {
    const auto* i = std::get_if<std::int64_t>(&v);
    return i && *i >= 8 && *i % 2 == 0 ? "" : "must be an even integer >= 8";
  };
}

template <class... Fs>
std::function<std::string(const ConfigValue&)> all(Fs... fs) {
  return [=](const ConfigValue& v) -> std::string {
    std::string msg;
    ((msg.empty() ? (msg = fs(v), 0) : 0), ...);
    return msg;
  };
}

} // namespace checks

/// Validated configuration for one run.
struct RunConfig {
  std::string kind;
  std::uint64_t seed = 42;
  std::string out = "out";
  std::map<std::string, ConfigValue> values;
  std::map<std::string, std::string> snapshot;  // "section.key" -> literal, defaults included

  [[nodiscard]] bool has(const std::string& key) const { return values.count(key) > 0; }

  template <class T>
  [[nodiscard]] const T& get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError(ConfigIssue::missing_key, kind + "." + key, "not set");
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError(ConfigIssue::type_error, kind + "." + key, "stored with a different type");
    return *v;
  }
  [[nodiscard]] double real(const std::string& key) const { return get<double>(key); }
  [[nodiscard]] std::int64_t integer(const std::string& key) const { return get<std::int64_t>(key); }
  [[nodiscard]] const std::string& text(const std::string& key) const { return get<std::string>(key); }
  [[nodiscard]] bool flag(const std::string& key) const { return get<bool>(key); }
  [[nodiscard]] const std::vector<double>& reals(const std::string& key) const {
    return get<std::vector<double>>(key);
  }
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"kernel", "smoothing", "besov", "triplets", "solve", "verify"};
  return kinds;
}

/// Key schema of each experiment section.
inline const std::vector<KeySpec>& schema(const std::string& kind) {
  using VT = ValueType;
  namespace C = checks;
  static const std::map<std::string, std::vector<KeySpec>> table{
      {"kernel",
       {
           {"alpha", VT::real_list, true, "", C::all(C::positive(), C::finite()), "dissipation orders"},
           {"n", VT::integer, false, "1", C::integer_in({1, 2}), "dimension"},
           {"nu", VT::real_list, false, "0", C::at_least(0.0), "derivative orders (0 < nu <= 4, or 0)"},
           {"x", VT::real_list, true, "", C::all(C::at_least(0.0), C::finite()), "radii |x|"},
           {"t", VT::real_list, false, "1", C::all(C::positive(), C::finite()), "times"},
           {"gradient", VT::boolean, false, "false", nullptr, "radial gradient instead of (-Lap)^{nu/2}"},
       }},
      {"smoothing",
       {
           {"alpha", VT::real_list, true, "", C::all(C::positive(), C::finite()), "dissipation orders"},
           {"n", VT::integer, false, "1", C::integer_in({1, 2}), "dimension"},
           {"r", VT::real_list, true, "", C::all(C::at_least(1.0), C::finite()), "source exponents"},
           {"p", VT::real_list, true, "", C::at_least(1.0), "target exponents, paired with r"},
           {"nu", VT::real_list, false, "0", C::at_least(0.0), "derivative orders"},
           {"N", VT::integer, false, "16384", C::even_grid(), "points per axis"},
           {"L", VT::real, false, "5", C::all(C::positive(), C::finite()), "box half-width"},
           {"t_min", VT::real, false, "0.01", C::positive(), "first fit time"},
           {"t_max", VT::real, false, "0.1", C::positive(), "last fit time"},
           {"per_decade", VT::integer, false, "16", C::at_least(16), "fit points per decade"},
           {"data", VT::text, false, "auto", C::one_of({"auto", "gaussian", "homogeneous"}), "initial data"},
           {"variance", VT::real, false, "1e-6", C::positive(), "Gaussian data exp(-|x|^2/(4 variance))"},
       }},
      {"besov",
       {
           {"s", VT::real, false, "-0.5", C::finite(), "smoothness (negative for the semigroup norm)"},
           {"p", VT::real, false, "4", C::at_least(1.0), "Lebesgue exponent"},
           {"q", VT::real, false, "inf", C::at_least(1.0), "summation exponent"},
           {"alpha", VT::real_list, false, "0.75, 1", C::all(C::positive(), C::finite()), "semigroup orders"},
           {"N", VT::integer, false, "4096", C::even_grid(), "points"},
           {"L", VT::real, false, "64pi", C::all(C::positive(), C::finite()), "box half-width"},
           {"profile", VT::text, false, "exp_glue", C::one_of({"exp_glue", "exp_sq_glue"}), "transition profile"},
       }},
      {"triplets",
       {
           {"n", VT::integer, true, "", C::integer_in({1, 2, 3}), "dimension"},
           {"alpha", VT::rational, true, "", C::positive(), "dissipation order"},
           {"b", VT::rational, true, "", C::positive(), "growth exponent"},
           {"d", VT::rational, false, "0", C::at_least(0.0), "derivative order of the nonlinearity"},
           {"r", VT::exponent, false, "", C::at_least(1.0), "data exponent for samples and blow-up rate"},
           {"p", VT::exponent, false, "", C::at_least(1.0), "exponent for sigma"},
           {"samples", VT::integer, false, "4", C::positive(), "sample triplets per class"},
       }},
      {"solve",
       {
           {"n", VT::integer, true, "", C::integer_in({1, 2}), "dimension"},
           {"alpha", VT::real, true, "", C::all(C::positive(), C::finite()), "dissipation order"},
           {"b", VT::real, true, "", C::all(C::positive(), C::finite()), "growth exponent"},
           {"sign", VT::integer, true, "", C::integer_in({-1, 1}), "+1 focusing, -1 defocusing"},
           {"N", VT::integer, true, "", C::even_grid(), "points per axis"},
           {"L", VT::real, true, "", C::all(C::positive(), C::finite()), "box half-width"},
           {"T", VT::real, true, "", C::all(C::positive(), C::finite()), "horizon"},
           {"kappa", VT::real, false, "1", C::all(C::at_least(0.0), C::finite()), "dissipation coefficient"},
           {"nonlinearity", VT::text, false, "power", C::one_of({"power", "abs_power", "qg", "none"}), "term"},
           {"operator", VT::text, false, "none", C::one_of({"none", "gradient", "power"}), "operator on F"},
           {"d", VT::real, false, "0", C::at_least(0.0), "order of operator = power"},
           {"b2", VT::real, false, "", C::positive(), "growth exponent of an optional second power term"},
           {"sign2", VT::integer, false, "", C::integer_in({-1, 1}), "sign of the second term"},
           {"initial", VT::text, false, "gaussian", C::one_of({"gaussian", "self_similar", "constant"}), "data"},
           {"A", VT::real, false, "1", C::finite(), "data amplitude"},
           {"width", VT::real, false, "1", C::positive(), "Gaussian data A exp(-|x|^2/width)"},
           {"eps", VT::real, false, "0.1", C::positive(), "regularization of self-similar data"},
           {"method", VT::text, false, "picard", C::one_of({"picard", "etd"}), "time integrator"},
           {"M", VT::integer, false, "64", C::at_least(16), "mesh intervals"},
           {"grading", VT::real, false, "", C::at_least(1.0), "mesh grading (default q/(q-(b+1)) or 1)"},
           {"r", VT::real, false, "2", C::at_least(1.0), "sup-norm exponent"},
           {"p", VT::real, false, "4", C::at_least(1.0), "space exponent of the L^q L^p norm"},
           {"q", VT::real, false, "8", C::at_least(1.0), "time exponent of the L^q L^p norm"},
           {"tol", VT::real, false, "1e-10", C::positive(), "Picard tolerance"},
           {"max_iterations", VT::integer, false, "40", C::positive(), "Picard iteration cap"},
           {"max_halvings", VT::integer, false, "6", C::at_least(0.0), "horizon halvings"},
           {"substeps", VT::integer, false, "1", C::positive(), "ETD steps per mesh interval"},
           {"adaptive", VT::boolean, false, "false", nullptr, "ETD step from the sup norm"},
           {"cfl", VT::real, false, "0.02", C::positive(), "adaptive step factor"},
           {"blowup_threshold", VT::real, false, "0", C::at_least(0.0), "overflow level, 0 = 1e6 ||phi||_inf"},
       }},
      {"verify",
       {
           {"suite", VT::text, true, "",
            C::one_of({"kernel", "smoothing", "besov", "duhamel", "blowup", "energy", "smalldata"}), "suite"},
       }},
  };
  const auto it = table.find(kind);
  if (it == table.end()) {
    std::string list;
    for (const auto& k : experiment_kinds()) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(ConfigIssue::type_error, "run.kind", "'" + kind + "' is not one of: " + list);
  }
  return it->second;
}

/// Validates raw sections into a RunConfig. `kind` overrides [run] kind when
/// non-empty (the subcommand); a conflicting [run] kind is an error.
inline RunConfig parse_config(const RawConfig& raw, const std::string& kind = "") {
  RunConfig cfg;
  std::map<std::string, std::string> run;
  if (auto it = raw.sections.find("run"); it != raw.sections.end()) run = it->second;
  for (const auto& [k, v] : run)
    if (k != "kind" && k != "seed" && k != "out") throw ConfigError(ConfigIssue::unknown_key, "run." + k, "");
  if (!kind.empty()) {
    if (run.count("kind") && run["kind"] != kind)
      throw ConfigError(ConfigIssue::type_error, "run.kind",
                        "config is for '" + run["kind"] + "' but the subcommand is '" + kind + "'");
    cfg.kind = kind;
  } else if (run.count("kind")) {
    cfg.kind = run["kind"];
  } else {
    throw ConfigError(ConfigIssue::missing_key, "run.kind", "no subcommand and no [run] kind");
  }
  const auto& keys = schema(cfg.kind);
  if (run.count("seed")) {
    const auto s = detail::parse_integer(run["seed"]);
    if (!s || *s < 0) throw ConfigError(ConfigIssue::type_error, "run.seed", "must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  if (run.count("out")) cfg.out = run["out"];
  cfg.snapshot["run.kind"] = cfg.kind;
  cfg.snapshot["run.seed"] = std::to_string(cfg.seed);

  for (const auto& [name, body] : raw.sections) {
    if (name == "run") continue;
    if (name != cfg.kind)
      throw ConfigError(ConfigIssue::unknown_key, "[" + name + "]", "section does not belong to '" + cfg.kind + "'");
  }
  std::map<std::string, std::string> given;
  if (auto it = raw.sections.find(cfg.kind); it != raw.sections.end()) given = it->second;
  for (const auto& [k, v] : given) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const KeySpec& s) { return s.name == k; });
    if (!known) throw ConfigError(ConfigIssue::unknown_key, cfg.kind + "." + k, "not a " + cfg.kind + " key");
  }
  for (const auto& spec : keys) {
    const std::string full = cfg.kind + "." + spec.name;
    std::string literal;
    if (auto it = given.find(spec.name); it != given.end()) {
      literal = it->second;
    } else if (spec.required) {
      throw ConfigError(ConfigIssue::missing_key, full, "required for " + cfg.kind);
    } else if (spec.fallback.empty()) {
      continue;
    } else {
      literal = spec.fallback;
    }
    auto value = detail::parse_value(spec.type, literal);
    if (!value)
      throw ConfigError(ConfigIssue::type_error, full,
                        "'" + literal + "' is not " + detail::type_name(spec.type));
    if (spec.check) {
      const std::string msg = spec.check(*value);
      if (!msg.empty()) throw ConfigError(ConfigIssue::type_error, full, "'" + literal + "' " + msg);
    }
    cfg.values.emplace(spec.name, std::move(*value));
    cfg.snapshot[full] = literal;
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text, const std::string& kind = "") {
  return parse_config(parse_config_text(text), kind);
}

} // namespace fracdiss
