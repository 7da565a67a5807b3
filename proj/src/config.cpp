#include "specsde/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

namespace specsde {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Both front-ends normalize to "section.key" -> (value text, line) before the
// typed extraction below, so schema diagnostics are shared.
class KeyValues {
 public:
  KeyValues(std::string origin) : origin_(std::move(origin)) {}

  void insert(const std::string& key, const std::string& value, int line) {
    if (kv_.count(key)) fail(key, line, "duplicate key");
    kv_[key] = {value, line};
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string take_string(const std::string& key, const std::string& fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    consumed_.insert(key);
    return it->second.first;
  }

  std::string require_string(const std::string& key) {
    if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return take_string(key, "");
  }

  double take_double(const std::string& key, double fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    consumed_.insert(key);
    return parse_double(key, it->second.first, it->second.second);
  }

  double require_double(const std::string& key) {
    if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return take_double(key, 0.0);
  }

  long take_long(const std::string& key, long fallback) {
    const double d = take_double(key, static_cast<double>(fallback));
    const long n = std::lround(d);
    if (static_cast<double>(n) != d) {
      fail(key, line_of(key), "expected an integer, got '" + fmt_double(d) + "'");
    }
    return n;
  }

  bool take_bool(const std::string& key, bool fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    consumed_.insert(key);
    const std::string& v = it->second.first;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key, it->second.second, "expected true/false");
    return false;
  }

  std::vector<double> take_double_list(const std::string& key, std::vector<double> fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    consumed_.insert(key);
    std::vector<double> out;
    std::stringstream ss(it->second.first);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      out.push_back(parse_double(key, tok, it->second.second));
    }
    if (out.empty()) fail(key, it->second.second, "expected a comma-separated list");
    return out;
  }

  std::vector<int> take_int_list(const std::string& key) {
    std::vector<int> out;
    for (double d : take_double_list(key, {})) {
      const int n = static_cast<int>(std::lround(d));
      if (static_cast<double>(n) != d) fail(key, line_of(key), "expected integers");
      out.push_back(n);
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, int line, const std::string& what) const {
    std::string where = origin_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": key '" + key + "': " + what);
  }

  void reject_unknown() const {
    for (const auto& [key, vl] : kv_) {
      if (!consumed_.count(key)) fail(key, vl.second, "unknown key");
    }
  }

 private:
  int line_of(const std::string& key) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? 0 : it->second.second;
  }

  double parse_double(const std::string& key, const std::string& text, int line) {
    try {
      size_t pos = 0;
      const double d = std::stod(text, &pos);
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return d;
    } catch (const std::exception&) {
      fail(key, line, "expected a number, got '" + text + "'");
    }
  }

  std::string origin_;
  std::map<std::string, std::pair<std::string, int>> kv_;
  std::set<std::string> consumed_;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void parse_ini(const std::string& text, const std::string& origin, KeyValues& kv) {
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    kv.insert(section + "." + key, value, lineno);
  }
}

std::string json_scalar_to_text(const nlohmann::json& v, const std::string& path,
                                const std::string& origin) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return fmt_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ",";
      out += json_scalar_to_text(e, path, origin);
    }
    return out;
  }
  throw ConfigError(origin + ": field '" + path + "': unsupported JSON value type");
}

void parse_json(const std::string& text, const std::string& origin, KeyValues& kv) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object of sections");
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) {
      throw ConfigError(origin + ": section '" + section + "' must be an object");
    }
    for (const auto& [key, value] : body.items()) {
      kv.insert(section + "." + key, json_scalar_to_text(value, section + "." + key, origin), 0);
    }
  }
}

ExperimentConfig extract(KeyValues& kv, const std::string& origin) {
  ExperimentConfig c;
  c.equation = kv.require_string("equation.name");
  if (c.equation != "semilinear" && c.equation != "burgers" && c.equation != "fractional") {
    throw ConfigError(origin + ": equation.name: unknown equation '" + c.equation +
                      "' (known: semilinear, burgers, fractional)");
  }
  c.gamma = kv.require_double("equation.gamma");
  c.g = kv.take_string("equation.g", "zero");
  c.f = kv.take_string("equation.f", "zero");
  c.h = kv.take_string("equation.h", "zero");
  c.f_const = kv.take_double("equation.f_const", 0.0);
  c.p0 = kv.take_double("equation.p0", 4.0);
  c.theta_override = kv.take_double("equation.theta", c.theta_override);
  c.K_override = kv.take_double("equation.K", c.K_override);
  c.L_override = kv.take_double("equation.L", c.L_override);

  c.m = static_cast<int>(kv.take_long("basis.m", 0));
  if (c.m < 1) throw ConfigError(origin + ": basis.m: required positive integer");
  c.grid_points = static_cast<int>(kv.take_long("basis.grid_points", 0));

  c.scheme = kv.take_string("solver.scheme", "semi_implicit_em");
  parse_scheme(c.scheme);  // validates
  c.dt = kv.take_double("solver.dt", 0.0);
  c.T = kv.take_double("solver.T", 0.0);
  const double seed_d = kv.take_double("solver.seed", 0.0);
  if (seed_d < 0) throw ConfigError(origin + ": solver.seed: must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed_d);
  c.noise_truncation = static_cast<int>(kv.take_long("solver.noise_truncation", -1));
  c.tame_threshold = kv.take_double("solver.tame_threshold", c.tame_threshold);
  c.u0 = kv.take_string("solver.u0", "mode:1:1");

  c.task.kind = kv.require_string("task.kind");
  const std::set<std::string> kinds = {"simulate",  "moments",     "check",
                                       "sharpness", "convergence", "unique-monitor"};
  if (!kinds.count(c.task.kind)) {
    throw ConfigError(origin + ": task.kind: unknown task '" + c.task.kind + "'");
  }
  c.task.p_list = kv.take_double_list("task.p_list", {});
  c.task.n_paths = kv.take_long("task.n_paths", c.task.n_paths);
  c.task.m_list = kv.take_int_list("task.m_list");
  c.task.c_budget = kv.take_double("task.c_budget", 0.0);
  c.task.samples = kv.take_long("task.samples", c.task.samples);
  c.task.decay_q = kv.take_double("task.decay_q", c.task.decay_q);
  c.task.amp_points = static_cast<int>(kv.take_long("task.amp_points", c.task.amp_points));
  c.task.gamma_sq_grid = kv.take_double_list("task.gamma_sq_grid", {});
  c.task.p_grid = kv.take_double_list("task.p_grid", c.task.p_grid);
  c.task.mode_k = static_cast<int>(kv.take_long("task.k", c.task.mode_k));
  c.task.dt_list = kv.take_double_list("task.dt_list", {});
  c.task.perturbation = kv.take_double("task.perturbation", c.task.perturbation);
  c.task.export_binary = kv.take_bool("task.export_binary", false);

  kv.reject_unknown();
  return c;
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
  if (s == "semi_implicit_em") return Scheme::SemiImplicitEM;
  if (s == "explicit_em") return Scheme::ExplicitEM;
  if (s == "tamed_em") return Scheme::TamedEM;
  throw ConfigError("unknown scheme '" + s +
                    "' (known: semi_implicit_em, explicit_em, tamed_em)");
}

ExperimentConfig parse_config_text(const std::string& text, bool json, const std::string& origin) {
  KeyValues kv(origin);
  if (json) {
    parse_json(text, origin, kv);
  } else {
    parse_ini(text, origin, kv);
  }
  return extract(kv, origin);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return parse_config_text(buf.str(), json, path);
}

std::string canonical_text(const ExperimentConfig& c) {
  // Sections and keys in a fixed sorted order, empty lists omitted: the text
  // re-parses to an identical config, so hash(parse(canonical(c))) == hash(c).
  std::map<std::string, std::map<std::string, std::string>> kv;
  kv["equation"]["name"] = c.equation;
  kv["equation"]["gamma"] = fmt_double(c.gamma);
  kv["equation"]["g"] = c.g;
  kv["equation"]["f"] = c.f;
  kv["equation"]["h"] = c.h;
  kv["equation"]["f_const"] = fmt_double(c.f_const);
  kv["equation"]["p0"] = fmt_double(c.p0);
  kv["equation"]["theta"] = fmt_double(c.theta_override);
  kv["equation"]["K"] = fmt_double(c.K_override);
  kv["equation"]["L"] = fmt_double(c.L_override);
  kv["basis"]["m"] = std::to_string(c.m);
  kv["basis"]["grid_points"] = std::to_string(c.grid_points);
  kv["solver"]["scheme"] = c.scheme;
  kv["solver"]["dt"] = fmt_double(c.dt);
  kv["solver"]["T"] = fmt_double(c.T);
  kv["solver"]["seed"] = std::to_string(c.seed);
  kv["solver"]["noise_truncation"] = std::to_string(c.noise_truncation);
  kv["solver"]["tame_threshold"] = fmt_double(c.tame_threshold);
  kv["solver"]["u0"] = c.u0;
  kv["task"]["kind"] = c.task.kind;
  auto list_text = [](const auto& v) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(e)>, double>) {
        out += fmt_double(e);
      } else {
        out += std::to_string(e);
      }
    }
    return out;
  };
  auto put_list = [&](const char* key, const auto& v) {
    if (!v.empty()) kv["task"][key] = list_text(v);
  };
  put_list("p_list", c.task.p_list);
  kv["task"]["n_paths"] = std::to_string(c.task.n_paths);
  put_list("m_list", c.task.m_list);
  kv["task"]["c_budget"] = fmt_double(c.task.c_budget);
  kv["task"]["samples"] = std::to_string(c.task.samples);
  kv["task"]["decay_q"] = fmt_double(c.task.decay_q);
  kv["task"]["amp_points"] = std::to_string(c.task.amp_points);
  put_list("gamma_sq_grid", c.task.gamma_sq_grid);
  put_list("p_grid", c.task.p_grid);
  kv["task"]["k"] = std::to_string(c.task.mode_k);
  put_list("dt_list", c.task.dt_list);
  kv["task"]["perturbation"] = fmt_double(c.task.perturbation);
  kv["task"]["export_binary"] = c.task.export_binary ? "true" : "false";
  std::string out;
  for (const auto& [section, body] : kv) {
    out += "[" + section + "]\n";
    for (const auto& [k, v] : body) out += k + " = " + v + "\n";
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  // FNV-1a 64
  const std::string text = canonical_text(c);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

EquationSpec build_equation(const ExperimentConfig& c) {
  BasisSpec basis;
  EquationSpec eq;
  try {
    if (c.equation == "fractional") {
      if (c.m % 2 == 0) {
        throw ConfigError("basis.m: fractional equation needs odd m = 2K+1");
      }
      const int kmax = (c.m - 1) / 2;
      basis = BasisSpec::fourier_torus(kmax, c.grid_points);
      eq = fractional_equation(c.gamma, c.p0, basis);
    } else if (c.equation == "burgers") {
      basis = BasisSpec::dirichlet(c.m, c.grid_points > 0 ? c.grid_points : dealias_grid(c.m, 2.0));
      eq = burgers_equation(c.gamma, scalar_fn(c.h), c.f_const, basis);
    } else {
      const GrowthFn f = growth_fn(c.f);
      const int n = c.grid_points > 0 ? c.grid_points : dealias_grid(c.m, std::max(2.0, f.growth_r));
      basis = BasisSpec::dirichlet(c.m, n);
      eq = semilinear_equation(c.gamma, scalar_fn(c.g), f, scalar_fn(c.h), c.f_const, basis);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("equation construction failed: ") + e.what());
  }
  if (!std::isnan(c.theta_override)) eq.ledger.theta = c.theta_override;
  if (!std::isnan(c.K_override)) eq.ledger.K = c.K_override;
  if (!std::isnan(c.L_override)) eq.ledger.L = c.L_override;
  return eq;
}

SpectralField build_initial_data(const ExperimentConfig& c, const BasisSpec& basis) {
  SpectralField u = zero_field(basis);
  std::stringstream ss(c.u0);
  std::string kind;
  std::getline(ss, kind, ':');
  auto next_double = [&](const char* what) {
    std::string tok;
    if (!std::getline(ss, tok, ':')) throw ConfigError("solver.u0: missing " + std::string(what));
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw ConfigError("solver.u0: bad " + std::string(what) + " '" + tok + "'");
    }
  };
  if (kind == "mode") {
    const int k = static_cast<int>(next_double("mode index"));
    const double amp = next_double("amplitude");
    if (basis.kind == BasisKind::DirichletSine) {
      if (k < 1 || k > basis.m) throw ConfigError("solver.u0: mode index out of range");
      u.coeffs[k - 1] = amp;
    } else {
      if (k < 0 || k > basis.max_wavenumber()) throw ConfigError("solver.u0: mode index out of range");
      u.coeffs[k == 0 ? 0 : 2 * k - 1] = amp;
    }
  } else if (kind == "decay") {
    const double q = next_double("decay exponent");
    const double amp = next_double("amplitude");
    const auto& t = tables_for(basis);
    for (int i = 0; i < basis.m; ++i) {
      const bool re_part = basis.kind == BasisKind::DirichletSine || i == 0 || i % 2 == 1;
      if (re_part) u.coeffs[i] = amp * std::pow(t.wavenumber[i] + 1.0, -q);
    }
  } else if (kind == "coeffs") {
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= basis.m) throw ConfigError("solver.u0: more coefficients than modes");
      try {
        u.coeffs[i++] = std::stod(tok);
      } catch (const std::exception&) {
        throw ConfigError("solver.u0: bad coefficient '" + tok + "'");
      }
    }
  } else {
    throw ConfigError("solver.u0: unknown form '" + kind + "' (mode:k:amp, decay:q:amp, coeffs:...)");
  }
  return u;
}

SolverConfig build_solver_config(const ExperimentConfig& c) {
  SolverConfig s;
  s.dt = c.dt;
  s.T = c.T;
  s.scheme = parse_scheme(c.scheme);
  s.noise_truncation = c.noise_truncation;
  s.seed = c.seed;
  if (!std::isnan(c.tame_threshold)) {
    s.tame_threshold = c.tame_threshold;
  } else if (c.equation == "burgers") {
    s.tame_threshold = 0.1;  // superlinear drift: tame once dt|N|_H crosses this
  }
  return s;
}

}  // namespace specsde
