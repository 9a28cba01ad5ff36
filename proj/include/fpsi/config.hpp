#pragma once
// Run configuration: INI-style text with [section] headers, key = value
// pairs, and # or ; comments. Unknown sections or keys are hard errors so a
// typo cannot silently fall back to a default. The canonical serialization
// feeds a stable 64-bit hash that output files embed, which ties every
// artifact back to the exact configuration that produced it.

#include "fpsi/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fpsi {

struct RunConfig {
  // geometry
  int nx = 8, ny = 8, nz = 8;
  // material / model parameters
  double nu = 1.0, lambda = 1.0, eta = 1.0;
  int ambient_quad = 4;  // rule for analytic transport data loads
  double c_s = 1.0;
  // ambient field
  std::string ambient_kind = "zero";
  std::string ambient_file;
  // plate nonlinearity
  std::string nonlinearity = "none";  // none | vonkarman
  std::string f0_id = "zero";
  double f0_scale = 0.0;
  // time stepping
  double dt = 1e-2;
  double T = 1.0;
  std::string scheme = "cn";  // ie | cn
  std::uint64_t seed = 12345;
  // solver knobs
  double krylov_tol = 1e-12;
  int krylov_maxit = 8000;
  // output
  std::string out_dir = "out";
  int checkpoint_cadence = 0;  // steps between checkpoints, 0 disables
  bool emit_svg = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config: bad numeric value '" + v + "' for " + key);
  }
}

inline int to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw config_error("config: bad integer value '" + v + "' for " + key);
  }
}

inline bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("config: bad boolean value '" + v + "' for " + key);
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error("config: malformed section at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "geometry" && section != "params" && section != "ambient" && section != "plate" &&
          section != "sim" && section != "solver" && section != "output")
        throw config_error("config: unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw config_error("config: expected key = value at line " + std::to_string(lineno));
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw config_error("config: empty key or value at line " + std::to_string(lineno));
    const std::string qual = section + "." + key;

    if (qual == "geometry.nx") c.nx = detail::to_int(val, qual);
    else if (qual == "geometry.ny") c.ny = detail::to_int(val, qual);
    else if (qual == "geometry.nz") c.nz = detail::to_int(val, qual);
    else if (qual == "params.nu") c.nu = detail::to_double(val, qual);
    else if (qual == "params.lambda_lame") c.lambda = detail::to_double(val, qual);
    else if (qual == "params.eta") c.eta = detail::to_double(val, qual);
    else if (qual == "params.ambient_quad") c.ambient_quad = detail::to_int(val, qual);
    else if (qual == "params.c_s") c.c_s = detail::to_double(val, qual);
    else if (qual == "ambient.kind") c.ambient_kind = val;
    else if (qual == "ambient.file") c.ambient_file = val;
    else if (qual == "plate.nonlinearity") c.nonlinearity = val;
    else if (qual == "plate.F0") c.f0_id = val;
    else if (qual == "plate.F0_scale") c.f0_scale = detail::to_double(val, qual);
    else if (qual == "sim.dt") c.dt = detail::to_double(val, qual);
    else if (qual == "sim.T") c.T = detail::to_double(val, qual);
    else if (qual == "sim.scheme") c.scheme = val;
    else if (qual == "sim.seed") c.seed = static_cast<std::uint64_t>(std::stoull(val));
    else if (qual == "solver.krylov_tol") c.krylov_tol = detail::to_double(val, qual);
    else if (qual == "solver.krylov_maxit") c.krylov_maxit = detail::to_int(val, qual);
    else if (qual == "output.directory") c.out_dir = val;
    else if (qual == "output.checkpoint_cadence") c.checkpoint_cadence = detail::to_int(val, qual);
    else if (qual == "output.emit_svg") c.emit_svg = detail::to_bool(val, qual);
    else throw config_error("config: unknown key '" + qual + "'");
  }
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

inline void validate(const RunConfig& c) {
  if (c.nx < 2 || c.ny < 2 || c.nz < 2) throw config_error("config: grid must be at least 2 cells per direction");
  if (c.nu <= 0.0 || c.eta < 0.0) throw config_error("config: need nu > 0 and eta >= 0");
  if (c.lambda < 0.0) throw config_error("config: need lambda_lame >= 0");
  if (c.ambient_quad < 2 || c.ambient_quad > 6) throw config_error("config: ambient_quad must be in [2, 6]");
  if (c.c_s <= 0.0) throw config_error("config: c_s must be positive");
  if (c.ambient_kind != "zero" && c.ambient_kind != "vortex" && c.ambient_kind != "columnar" && c.ambient_kind != "file")
    throw config_error("config: unknown ambient kind '" + c.ambient_kind + "'");
  if (c.ambient_kind == "file" && c.ambient_file.empty()) throw config_error("config: ambient kind 'file' needs ambient.file");
  if (c.nonlinearity != "none" && c.nonlinearity != "vonkarman")
    throw config_error("config: unknown nonlinearity '" + c.nonlinearity + "'");
  if (c.f0_id != "zero" && c.f0_id != "bubble") throw config_error("config: unknown prestress '" + c.f0_id + "'");
  if (c.dt <= 0.0 || c.T < 0.0) throw config_error("config: need dt > 0 and T >= 0");
  if (c.scheme != "ie" && c.scheme != "cn") throw config_error("config: scheme must be 'ie' or 'cn'");
  if (c.krylov_tol <= 0.0 || c.krylov_maxit < 1) throw config_error("config: bad solver settings");
  if (c.checkpoint_cadence < 0) throw config_error("config: checkpoint_cadence must be >= 0");
}

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"geometry", {{"nx", c.nx}, {"ny", c.ny}, {"nz", c.nz}}},
                        {"params",
                         {{"nu", c.nu},
                          {"lambda_lame", c.lambda},
                          {"eta", c.eta},
                          {"ambient_quad", c.ambient_quad},
                          {"c_s", c.c_s}}},
                        {"ambient", {{"kind", c.ambient_kind}, {"file", c.ambient_file}}},
                        {"plate", {{"nonlinearity", c.nonlinearity}, {"F0", c.f0_id}, {"F0_scale", c.f0_scale}}},
                        {"sim", {{"dt", c.dt}, {"T", c.T}, {"scheme", c.scheme}, {"seed", c.seed}}},
                        {"solver", {{"krylov_tol", c.krylov_tol}, {"krylov_maxit", c.krylov_maxit}}},
                        {"output",
                         {{"directory", c.out_dir},
                          {"checkpoint_cadence", c.checkpoint_cadence},
                          {"emit_svg", c.emit_svg}}}};
}

/// FNV-1a over the canonical JSON dump; stable across runs and platforms.
inline std::string config_hash(const RunConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace fpsi
