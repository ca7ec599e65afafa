#include "invmed/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "invmed/io.hpp"

namespace invmed {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'", key);
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'", key);
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos) {
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'",
                      key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'", key);
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what, key);
}

void check_choice(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> choices) {
  for (const char* c : choices) {
    if (value == c) return;
  }
  std::string list;
  for (const char* c : choices) {
    if (!list.empty()) list += " | ";
    list += c;
  }
  throw ConfigError("key '" + key + "': expected one of {" + list + "}, got '" + value + "'",
                    key);
}

struct KeyHandler {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, KeyHandler>>& registry() {
  static const auto* reg = new std::vector<std::pair<std::string, KeyHandler>>{
      {"nx",
       {[](RunConfig& c, const std::string& v) {
          c.nx = static_cast<int>(parse_int("nx", v));
          check(c.nx >= 3, "nx", "grid needs at least 3 nodes per axis");
        },
        [](const RunConfig& c) { return std::to_string(c.nx); }}},
      {"ny",
       {[](RunConfig& c, const std::string& v) {
          c.ny = static_cast<int>(parse_int("ny", v));
          check(c.ny >= 3, "ny", "grid needs at least 3 nodes per axis");
        },
        [](const RunConfig& c) { return std::to_string(c.ny); }}},
      {"mu_bar",
       {[](RunConfig& c, const std::string& v) {
          c.mu_bar = parse_double("mu_bar", v);
          check(c.mu_bar > 0, "mu_bar", "background must be positive");
        },
        [](const RunConfig& c) { return format_double(c.mu_bar); }}},
      {"g_const",
       {[](RunConfig& c, const std::string& v) { c.g_const = parse_double("g_const", v); },
        [](const RunConfig& c) { return format_double(c.g_const); }}},
      {"inclusions",
       {[](RunConfig& c, const std::string& v) { c.inclusions = trim(v); },
        [](const RunConfig& c) { return c.inclusions; }}},
      {"noise",
       {[](RunConfig& c, const std::string& v) {
          c.noise = parse_double("noise", v);
          check(c.noise >= 0, "noise", "noise level must be >= 0");
        },
        [](const RunConfig& c) { return format_double(c.noise); }}},
      {"seed",
       {[](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"epsilon",
       {[](RunConfig& c, const std::string& v) {
          c.epsilon = parse_double("epsilon", v);
          check(c.epsilon > 0, "epsilon", "data-fit weight must be positive");
        },
        [](const RunConfig& c) { return format_double(c.epsilon); }}},
      {"s",
       {[](RunConfig& c, const std::string& v) {
          c.s = static_cast<int>(parse_int("s", v));
          check(c.s >= 0, "s", "P power must be >= 0");
        },
        [](const RunConfig& c) { return std::to_string(c.s); }}},
      {"t",
       {[](RunConfig& c, const std::string& v) {
          c.t = parse_double("t", v);
          check(c.t >= 0, "t", "weight power must be >= 0");
        },
        [](const RunConfig& c) { return format_double(c.t); }}},
      {"probe_method",
       {[](RunConfig& c, const std::string& v) {
          check_choice("probe_method", v, {"green", "adjoint"});
          c.probe_method = v;
        },
        [](const RunConfig& c) { return c.probe_method; }}},
      {"normalize",
       {[](RunConfig& c, const std::string& v) { c.normalize = parse_bool("normalize", v); },
        [](const RunConfig& c) { return c.normalize ? "true" : "false"; }}},
      {"max_iter",
       {[](RunConfig& c, const std::string& v) {
          c.max_iter = static_cast<int>(parse_int("max_iter", v));
          check(c.max_iter >= 1, "max_iter", "iteration cap must be >= 1");
        },
        [](const RunConfig& c) { return std::to_string(c.max_iter); }}},
      {"tol",
       {[](RunConfig& c, const std::string& v) {
          c.tol = parse_double("tol", v);
          check(c.tol > 0 && c.tol < 1, "tol", "tolerance must lie in (0, 1)");
        },
        [](const RunConfig& c) { return format_double(c.tol); }}},
      {"theta",
       {[](RunConfig& c, const std::string& v) {
          c.theta = parse_double("theta", v);
          check(c.theta > 0 && c.theta <= 1, "theta", "damping must lie in (0, 1]");
        },
        [](const RunConfig& c) { return format_double(c.theta); }}},
      {"tau",
       {[](RunConfig& c, const std::string& v) {
          c.tau = parse_double("tau", v);
          check(c.tau > 0, "tau", "recovery floor must be positive");
        },
        [](const RunConfig& c) { return format_double(c.tau); }}},
      {"mode",
       {[](RunConfig& c, const std::string& v) {
          check_choice("mode", v, {"neumann", "dirichlet"});
          c.mode = v;
        },
        [](const RunConfig& c) { return c.mode; }}},
      {"engine",
       {[](RunConfig& c, const std::string& v) {
          check_choice("engine", v, {"coupled", "adi"});
          c.engine = v;
        },
        [](const RunConfig& c) { return c.engine; }}},
      {"epsilons",
       {[](RunConfig& c, const std::string& v) { c.epsilons = trim(v); },
        [](const RunConfig& c) { return c.epsilons; }}},
      {"T",
       {[](RunConfig& c, const std::string& v) {
          c.T = parse_double("T", v);
          check(c.T > 0, "T", "final time must be positive");
        },
        [](const RunConfig& c) { return format_double(c.T); }}},
      {"nt",
       {[](RunConfig& c, const std::string& v) {
          c.nt = static_cast<int>(parse_int("nt", v));
          check(c.nt >= 2, "nt", "time grid needs at least 2 steps");
        },
        [](const RunConfig& c) { return std::to_string(c.nt); }}},
      {"alpha",
       {[](RunConfig& c, const std::string& v) {
          c.alpha = parse_double("alpha", v);
          check(c.alpha >= 0, "alpha", "initial-gradient weight must be >= 0");
        },
        [](const RunConfig& c) { return format_double(c.alpha); }}},
      {"y0_spec",
       {[](RunConfig& c, const std::string& v) { c.y0_spec = trim(v); },
        [](const RunConfig& c) { return c.y0_spec; }}},
      {"drift",
       {[](RunConfig& c, const std::string& v) { c.drift = trim(v); },
        [](const RunConfig& c) { return c.drift; }}},
      {"move_radius",
       {[](RunConfig& c, const std::string& v) {
          c.move_radius = parse_double("move_radius", v);
          check(c.move_radius > 0, "move_radius", "radius must be positive");
        },
        [](const RunConfig& c) { return format_double(c.move_radius); }}},
      {"move_amp",
       {[](RunConfig& c, const std::string& v) {
          c.move_amp = parse_double("move_amp", v);
          check(c.move_amp >= 0, "move_amp", "amplitude must be >= 0");
        },
        [](const RunConfig& c) { return format_double(c.move_amp); }}},
      {"solver",
       {[](RunConfig& c, const std::string& v) {
          check_choice("solver", v, {"direct", "cg"});
          c.solver = v;
        },
        [](const RunConfig& c) { return c.solver; }}},
      {"cg_tol",
       {[](RunConfig& c, const std::string& v) {
          c.cg_tol = parse_double("cg_tol", v);
          check(c.cg_tol > 0 && c.cg_tol < 1, "cg_tol", "tolerance must lie in (0, 1)");
        },
        [](const RunConfig& c) { return format_double(c.cg_tol); }}},
      {"cg_max_iter",
       {[](RunConfig& c, const std::string& v) {
          c.cg_max_iter = static_cast<int>(parse_int("cg_max_iter", v));
          check(c.cg_max_iter >= 0, "cg_max_iter", "must be >= 0 (0 = automatic)");
        },
        [](const RunConfig& c) { return std::to_string(c.cg_max_iter); }}},
      {"out",
       {[](RunConfig& c, const std::string& v) {
          check(!trim(v).empty(), "out", "output directory must not be empty");
          c.out = trim(v);
        },
        [](const RunConfig& c) { return c.out; }}},
  };
  return *reg;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const auto* keys = [] {
    auto* v = new std::vector<std::string>;
    for (const auto& [name, handler] : registry()) v->push_back(name);
    return v;
  }();
  return *keys;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, handler] : registry()) {
    if (name == key) {
      handler.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'", key);
}

RunConfig parse_config(const std::optional<std::string>& config_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw IoError("cannot read config file: " + *config_path);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("malformed config line (expected key = value): '" + line + "'",
                          line);
      }
      apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) apply_key(cfg, key, value);
  // cross-field sanity that single keys cannot see
  medium_from_config(cfg);
  epsilons_from_config(cfg);
  drift_from_config(cfg);
  return cfg;
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& [name, handler] : registry()) {
    out << name << " = " << handler.get(cfg) << '\n';
  }
  return out.str();
}

Medium medium_from_config(const RunConfig& cfg) {
  Medium medium;
  medium.mu_bar = cfg.mu_bar;
  const std::string spec = cfg.inclusions;
  if (trim(spec).empty() || trim(spec) == "none") return medium;
  std::stringstream parts(spec);
  std::string item;
  while (std::getline(parts, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::istringstream is(item);
    std::string shape;
    is >> shape;
    if (shape == "disk") {
      DiskInclusion d;
      if (!(is >> d.cx >> d.cy >> d.radius >> d.amplitude)) {
        throw ConfigError("key 'inclusions': disk needs 'disk cx cy r amp', got '" + item +
                              "'",
                          "inclusions");
      }
      medium.inclusions.push_back(d);
    } else if (shape == "rect") {
      RectInclusion r;
      if (!(is >> r.x0 >> r.y0 >> r.ex >> r.ey >> r.amplitude)) {
        throw ConfigError(
            "key 'inclusions': rect needs 'rect x0 y0 ex ey amp', got '" + item + "'",
            "inclusions");
      }
      medium.inclusions.push_back(r);
    } else {
      throw ConfigError("key 'inclusions': unknown shape '" + shape + "'", "inclusions");
    }
    std::string rest;
    if (is >> rest) {
      throw ConfigError("key 'inclusions': trailing tokens in '" + item + "'", "inclusions");
    }
  }
  return medium;
}

std::vector<double> epsilons_from_config(const RunConfig& cfg) {
  std::vector<double> out;
  std::stringstream parts(cfg.epsilons);
  std::string item;
  while (std::getline(parts, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double("epsilons", item));
    if (!(out.back() > 0)) {
      throw ConfigError("key 'epsilons': values must be positive", "epsilons");
    }
    if (out.size() > 1 && out[out.size() - 2] <= out.back()) {
      throw ConfigError("key 'epsilons': values must be strictly decreasing", "epsilons");
    }
  }
  if (out.empty()) throw ConfigError("key 'epsilons': empty list", "epsilons");
  return out;
}

LinearDrift drift_from_config(const RunConfig& cfg) {
  std::istringstream is(cfg.drift);
  LinearDrift d;
  if (!(is >> d.x0 >> d.y0 >> d.dx >> d.dy)) {
    throw ConfigError("key 'drift': expected 'x0 y0 dx dy', got '" + cfg.drift + "'",
                      "drift");
  }
  std::string rest;
  if (is >> rest) throw ConfigError("key 'drift': trailing tokens", "drift");
  return d;
}

SaddleConfig saddle_from_config(const RunConfig& cfg) {
  SaddleConfig sc;
  sc.epsilon = cfg.epsilon;
  sc.mu_bar = cfg.mu_bar;
  sc.mismatch_power = cfg.s;
  sc.max_iterations = cfg.max_iter;
  sc.tolerance = cfg.tol;
  sc.mode = cfg.mode == "dirichlet" ? DataMode::kDirichletData : DataMode::kNeumannData;
  return sc;
}

SolverConfig solver_from_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.method =
      cfg.solver == "cg" ? SolverConfig::Method::kCg : SolverConfig::Method::kDirect;
  sc.cg_tolerance = cfg.cg_tol;
  sc.max_iterations = cfg.cg_max_iter;
  return sc;
}

}  // namespace invmed
