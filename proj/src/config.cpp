#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "acmorse/config.hpp"

namespace acmorse {

namespace {

const std::vector<std::string> kKnownKeys = {
    "grid.dim",         "grid.lengths",      "grid.sizes",
    "metric.kind",      "metric.file",
    "potential.kind",   "potential.coeffs",
    "epsilon",          "epsilon.lo",        "epsilon.hi",
    "spectrum.count",
    "solve.initial.kind", "solve.initial.value", "solve.initial.file",
    "solve.initial.mode", "solve.initial.amplitude",
    "solve.tol",
    "deflation.seeds",  "deflation.modes",
    "continuation.direction", "continuation.step", "continuation.minstep",
    "continuation.maxstep",   "continuation.steps",
    "flow.dt",          "flow.steps",        "flow.stride",
    "verify.seeds",
    "homology.seeds",   "homology.samples",
    "rng.seed",         "output.dir",        "run.threads",
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& origin,
                            const std::string& what) {
  throw std::invalid_argument(origin + ": key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& origin, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    bad_value(key, origin, "'" + v + "' is not a number");
  return x;
}

std::int64_t to_int(const std::string& key, const std::string& origin, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    bad_value(key, origin, "'" + v + "' is not an integer");
  return x;
}

}  // namespace

const std::vector<std::string>& Config::known_keys() { return kKnownKeys; }

void Config::check_known(const std::string& key, const std::string& origin) {
  if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
    throw std::invalid_argument(origin + ": unknown key '" + key + "'");
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    for (char c : key)
      if (!(std::islower(static_cast<unsigned char>(c)) ||
            std::isdigit(static_cast<unsigned char>(c)) || c == '.'))
        throw std::invalid_argument(where + ": key '" + key +
                                    "' must be lowercase dotted words");
    check_known(key, where);
    if (cfg.entries_.count(key))
      throw std::invalid_argument(where + ": duplicate key '" + key + "' (first set at " +
                                  cfg.entries_[key].origin + ")");
    cfg.entries_[key] = Entry{value, where};
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

void Config::apply_environment() {
  for (const std::string& key : kKnownKeys) {
    std::string name = "ACMORSE_";
    for (char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(c));
    if (const char* v = std::getenv(name.c_str()))
      entries_[key] = Entry{v, "environment (" + name + ")"};
  }
}

const Config::Entry* Config::find(const std::string& key) const {
  check_known(key, "<lookup>");
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw std::invalid_argument("missing required config key '" + key + "'");
  return e->value;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  const Entry* e = find(key);
  return e ? e->value : def;
}

double Config::get_double(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw std::invalid_argument("missing required config key '" + key + "'");
  return to_double(key, e->origin, e->value);
}

double Config::get_double(const std::string& key, double def) const {
  const Entry* e = find(key);
  return e ? to_double(key, e->origin, e->value) : def;
}

std::int64_t Config::get_int(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw std::invalid_argument("missing required config key '" + key + "'");
  return to_int(key, e->origin, e->value);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
  const Entry* e = find(key);
  return e ? to_int(key, e->origin, e->value) : def;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t def) const {
  const Entry* e = find(key);
  if (!e) return def;
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(e->value.c_str(), &end, 10);
  if (e->value.empty() || end != e->value.c_str() + e->value.size() || errno == ERANGE)
    bad_value(key, e->origin, "'" + e->value + "' is not an unsigned integer");
  return x;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw std::invalid_argument("missing required config key '" + key + "'");
  std::vector<double> out;
  for (const std::string& part : split_list(e->value))
    out.push_back(to_double(key, e->origin, part));
  return out;
}

std::vector<std::int64_t> Config::get_ints(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw std::invalid_argument("missing required config key '" + key + "'");
  std::vector<std::int64_t> out;
  for (const std::string& part : split_list(e->value))
    out.push_back(to_int(key, e->origin, part));
  return out;
}

}  // namespace acmorse
