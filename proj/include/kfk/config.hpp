#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kfk/core.hpp"
#include "kfk/errors.hpp"

namespace kfk {

struct SweepSettings {
  std::vector<double> eps_list = {0.25, 0.2, 0.15, 0.1, 0.07, 0.05};
  long n_paths = 1'000'000;
  double dt = 1e-3;
  double max_time = 64.0;
  double tol_lower = 0.3;
  double tol_upper = 0.3;
  double tol_theorem = 0.35;
  long trace_paths = 0;  // debug trace dump, capped at 1000
};

struct KernelSettings {
  double t = 1.0;
  int nx = 256;
  int nv = 256;
  double x_extent = 0.0;  // 0 = kinetic default
  double v_extent = 0.0;
};

struct ValidateSettings {
  long n_paths = 200'000;
  double dt = 1e-3;
};

/// Fully resolved run configuration (defaults filled, ranges checked).
struct RunConfig {
  std::string command = "validate";
  int d = 1;
  double s = 0.5;
  std::uint64_t seed = 20260808;
  std::string output_dir = "out";
  int workers = 0;
  SweepSettings sweep;
  KernelSettings kernel;
  ValidateSettings validate;

  Params params() const { return Params(d, s); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse '" + v + "' as a number");
  }
  if (pos != v.size() || !std::isfinite(x))
    throw config_error("key '" + key + "': cannot parse '" + v + "' as a number");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse '" + v + "' as an integer");
  }
  if (pos != v.size())
    throw config_error("key '" + key + "': cannot parse '" + v + "' as an integer");
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse '" + v +
                       "' as an unsigned integer");
  }
  if (pos != v.size())
    throw config_error("key '" + key + "': cannot parse '" + v +
                       "' as an unsigned integer");
  return x;
}

inline std::vector<double> parse_eps_list(const std::string& key,
                                          const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw config_error("key '" + key + "': list must contain at least one value");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || !(out[i] <= 0.25))
      throw config_error("key '" + key + "': values must lie in (0, 0.25]");
    if (i > 0 && !(out[i] < out[i - 1]))
      throw config_error("key '" + key + "': values must be strictly decreasing");
  }
  return out;
}

inline void apply_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "command") {
    if (value != "sweep" && value != "kernel" && value != "validate")
      throw config_error("key 'command': must be one of sweep, kernel, validate");
    cfg.command = value;
  } else if (key == "d") {
    const long long d = parse_int(key, value);
    if (d < 1 || d > 16)
      throw config_error("key 'd': value " + value + " outside [1, 16]");
    cfg.d = static_cast<int>(d);
  } else if (key == "s") {
    const double s = parse_double(key, value);
    if (!(s > 0.0) || !(s < 1.0))
      throw config_error("key 's': value " + value + " outside (0,1)");
    cfg.s = s;
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "output_dir") {
    if (value.empty()) throw config_error("key 'output_dir': must be nonempty");
    cfg.output_dir = value;
  } else if (key == "workers") {
    const long long w = parse_int(key, value);
    if (w < 0 || w > 4096)
      throw config_error("key 'workers': value " + value + " outside [0, 4096]");
    cfg.workers = static_cast<int>(w);
  } else if (key == "sweep.eps_list") {
    cfg.sweep.eps_list = parse_eps_list(key, value);
  } else if (key == "sweep.n_paths") {
    const long long n = parse_int(key, value);
    if (n < 1) throw config_error("key 'sweep.n_paths': must be >= 1");
    cfg.sweep.n_paths = n;
  } else if (key == "sweep.dt") {
    const double x = parse_double(key, value);
    if (!(x > 0.0)) throw config_error("key 'sweep.dt': must be > 0");
    cfg.sweep.dt = x;
  } else if (key == "sweep.max_time") {
    const double x = parse_double(key, value);
    if (!(x > 0.0)) throw config_error("key 'sweep.max_time': must be > 0");
    cfg.sweep.max_time = x;
  } else if (key == "sweep.trace_paths") {
    const long long n = parse_int(key, value);
    if (n < 0 || n > 1000)
      throw config_error("key 'sweep.trace_paths': value outside [0, 1000]");
    cfg.sweep.trace_paths = n;
  } else if (key == "sweep.tol_lower" || key == "sweep.tol_upper" ||
             key == "sweep.tol_theorem") {
    const double x = parse_double(key, value);
    if (!(x > 0.0) || !(x <= 2.0))
      throw config_error("key '" + key + "': value outside (0, 2]");
    if (key == "sweep.tol_lower") cfg.sweep.tol_lower = x;
    else if (key == "sweep.tol_upper") cfg.sweep.tol_upper = x;
    else cfg.sweep.tol_theorem = x;
  } else if (key == "kernel.t") {
    const double x = parse_double(key, value);
    if (!(x > 0.0)) throw config_error("key 'kernel.t': must be > 0");
    cfg.kernel.t = x;
  } else if (key == "kernel.nx" || key == "kernel.nv") {
    const long long n = parse_int(key, value);
    if (n < 8 || n > 8192 || n % 2)
      throw config_error("key '" + key + "': must be even and in [8, 8192]");
    if (key == "kernel.nx") cfg.kernel.nx = static_cast<int>(n);
    else cfg.kernel.nv = static_cast<int>(n);
  } else if (key == "kernel.x_extent" || key == "kernel.v_extent") {
    const double x = parse_double(key, value);
    if (!(x >= 0.0)) throw config_error("key '" + key + "': must be >= 0");
    if (key == "kernel.x_extent") cfg.kernel.x_extent = x;
    else cfg.kernel.v_extent = x;
  } else if (key == "validate.n_paths") {
    const long long n = parse_int(key, value);
    if (n < 1000) throw config_error("key 'validate.n_paths': must be >= 1000");
    cfg.validate.n_paths = n;
  } else if (key == "validate.dt") {
    const double x = parse_double(key, value);
    if (!(x > 0.0)) throw config_error("key 'validate.dt': must be > 0");
    cfg.validate.dt = x;
  } else {
    throw config_error("unknown key '" + key + "'");
  }
}

inline void cross_validate(const RunConfig& cfg) {
  if (!(cfg.sweep.dt <= cfg.sweep.max_time))
    throw config_error("key 'sweep.dt': must not exceed sweep.max_time");
  Params check(cfg.d, cfg.s);  // range re-check, throws invalid_parameter
  (void)check;
}

}  // namespace detail

/// Parses the line-oriented key = value configuration document. Sections
/// ([sweep], [kernel], [validate]) prefix their keys; dotted keys work
/// without sections. '#' lines are comments. Unknown keys are hard errors;
/// missing keys keep their documented defaults.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {}) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section != "sweep" && section != "kernel" && section != "validate")
        throw config_error("line " + std::to_string(line_no) + ": unknown section '" +
                           section + "'");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(line_no) +
                         ": expected 'key = value', got '" + t + "'");
    std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw config_error("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty() && key.find('.') == std::string::npos)
      key = section + "." + key;
    try {
      detail::apply_key(cfg, key, value);
    } catch (const config_error& e) {
      throw config_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw config_error("override '" + ov + "': expected key=value");
    detail::apply_key(cfg, detail::trim(ov.substr(0, eq)),
                      detail::trim(ov.substr(eq + 1)));
  }
  detail::cross_validate(cfg);
  return cfg;
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// The fully resolved configuration as a flat key -> value map; serializing
/// it back through parse_config reproduces the same configuration.
inline std::map<std::string, std::string> resolved_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["command"] = cfg.command;
  m["d"] = std::to_string(cfg.d);
  m["s"] = detail::fmt17(cfg.s);
  m["seed"] = std::to_string(cfg.seed);
  m["output_dir"] = cfg.output_dir;
  m["workers"] = std::to_string(cfg.workers);
  std::string eps;
  for (std::size_t i = 0; i < cfg.sweep.eps_list.size(); ++i) {
    if (i) eps += ",";
    eps += detail::fmt17(cfg.sweep.eps_list[i]);
  }
  m["sweep.eps_list"] = eps;
  m["sweep.n_paths"] = std::to_string(cfg.sweep.n_paths);
  m["sweep.dt"] = detail::fmt17(cfg.sweep.dt);
  m["sweep.max_time"] = detail::fmt17(cfg.sweep.max_time);
  m["sweep.trace_paths"] = std::to_string(cfg.sweep.trace_paths);
  m["sweep.tol_lower"] = detail::fmt17(cfg.sweep.tol_lower);
  m["sweep.tol_upper"] = detail::fmt17(cfg.sweep.tol_upper);
  m["sweep.tol_theorem"] = detail::fmt17(cfg.sweep.tol_theorem);
  m["kernel.t"] = detail::fmt17(cfg.kernel.t);
  m["kernel.nx"] = std::to_string(cfg.kernel.nx);
  m["kernel.nv"] = std::to_string(cfg.kernel.nv);
  m["kernel.x_extent"] = detail::fmt17(cfg.kernel.x_extent);
  m["kernel.v_extent"] = detail::fmt17(cfg.kernel.v_extent);
  m["validate.n_paths"] = std::to_string(cfg.validate.n_paths);
  m["validate.dt"] = detail::fmt17(cfg.validate.dt);
  return m;
}

/// key = value document for a resolved map (manifest echo, round-trip tests).
inline std::string serialize_config(const std::map<std::string, std::string>& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

}  // namespace kfk
