#include "mhdl/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "mhdl/builtins.hpp"
#include "mhdl/io.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error(ErrorKind::Config, "config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error(ErrorKind::Config, "config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw Error(ErrorKind::Config, "config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw Error(ErrorKind::Config, "config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::Config, "config line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!kv.emplace(full, value).second)
      throw Error(ErrorKind::Config, "config line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
  }
  return kv;
}

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::Config, "config: " + m); };
  if (dim != 2 && dim != 3) bad("dim must be 2 or 3");
  if (nx < 28 || nx % 4 != 0) bad("nx must be a multiple of 4, at least 28");
  if (!(kappa > 0)) bad("kappa must be positive");
  if (!(lambda >= 0)) bad("lambda must be non-negative");
  if (!(t_final >= 0)) bad("t_final must be non-negative");
  if (dt_policy == DtPolicy::Fixed && !(dt > 0)) bad("fixed dt policy needs dt > 0");
  if (!(cfl_scale > 0)) bad("cfl_scale must be positive");
  if (r_max < 0 || r_max > 2) bad("r_max must be 0, 1 or 2");
  if (order < 1 || order > 3) bad("order must be 1..3");
  if (snapshot_every < 1) bad("snapshot_every must be positive");
  if (source.empty()) bad("source is empty");
  for (double k : kappas)
    if (!(k > 0)) bad("kappa values must be positive");
  static const std::set<std::string> known{"energy", "rt", "divb", "apriori"};
  for (const auto& m : monitors)
    if (!known.count(m)) bad("unknown monitor '" + m + "'");
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv, RunConfig c) {
  static const std::set<std::string> sections{"", "run", "init", "output"};
  for (const auto& [full, v] : kv) {
    const auto dot = full.find('.');
    const std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
    const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    if (!sections.count(sec)) throw Error(ErrorKind::Config, "config: unknown section [" + sec + "]");
    if (key == "dim") c.dim = static_cast<int>(to_int(full, v));
    else if (key == "nx") c.nx = static_cast<int>(to_int(full, v));
    else if (key == "kappa") c.kappa = to_double(full, v);
    else if (key == "lambda") c.lambda = to_double(full, v);
    else if (key == "t_final" || key == "tmax") c.t_final = to_double(full, v);
    else if (key == "dt_policy") {
      if (v == "cfl") c.dt_policy = DtPolicy::Cfl;
      else if (v == "fixed") c.dt_policy = DtPolicy::Fixed;
      else throw Error(ErrorKind::Config, "config: dt_policy must be cfl or fixed");
    } else if (key == "dt") c.dt = to_double(full, v);
    else if (key == "cfl_scale") c.cfl_scale = to_double(full, v);
    else if (key == "r_max") c.r_max = static_cast<int>(to_int(full, v));
    else if (key == "order") c.order = static_cast<int>(to_int(full, v));
    else if (key == "source") c.source = v;
    else if (key == "compatible") c.compatible = to_bool(full, v);
    else if (key == "monitors") c.monitors = split_list(v);
    else if (key == "out") c.out = v;
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(full, v));
    else if (key == "snapshot_every") c.snapshot_every = static_cast<int>(to_int(full, v));
    else if (key == "kappas") {
      c.kappas.clear();
      for (const auto& s : split_list(v)) c.kappas.push_back(to_double(full, s));
    } else {
      throw Error(ErrorKind::Config, "config: unknown key '" + full + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return config_from_map(parse_config(text));
}

}  // namespace mhdl
