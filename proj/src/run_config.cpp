#include "holder_vi/run_config.hpp"

#include "holder_vi/problems.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hvi {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

std::string RunConfig::to_ini() const {
  std::ostringstream os;
  const auto params = resolved_problem_params(problem);
  const std::string canonical = canonical_problem_spec(problem);
  os << "[problem]\n";
  os << "name = " << canonical.substr(0, canonical.find(':')) << "\n";
  for (const auto& [k, v] : params) os << k << " = " << v << "\n";
  if (declared_H_scale != 1.0) os << "declared_H_scale = " << num(declared_H_scale) << "\n";

  const SolverConfig& s = solver;
  os << "[solver]\n";
  os << "method = " << to_string(s.method) << "\n";
  if (s.nu) os << "nu = " << num(*s.nu) << "\n";
  if (s.H_nu) os << "H = " << num(*s.H_nu) << "\n";
  os << "H0 = " << num(s.H0) << "\n";
  os << "p = " << s.p << "\n";
  os << "K = " << s.K << "\n";
  os << "eps = " << num(s.eps) << "\n";
  os << "inner_tol = " << num(s.resolved_inner_tol()) << "\n";
  os << "max_doublings = " << s.max_doublings << "\n";
  os << "seed = " << s.seed << "\n";
  if (s.step) os << "step = " << num(*s.step) << "\n";
  os << "gap_every_iteration = " << (s.gap_every_iteration ? "true" : "false") << "\n";
  if (s.allow_untested_order) os << "allow_untested_order = true\n";

  os << "[output]\n";
  os << "dir = " << out_dir << "\n";
  os << "wall_time = " << (s.record_wall_time ? "true" : "false") << "\n";
  return os.str();
}

std::string RunConfig::echo() const {
  std::istringstream in(to_ini());
  std::ostringstream os;
  std::string line;
  while (std::getline(in, line)) os << "# " << line << "\n";
  return os.str();
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::string name;
  std::vector<std::pair<std::string, std::string>> problem_params;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "solver" && section != "output") {
        throw ConfigError("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any section");
    if (!seen.insert(section + "." + key).second) {
      throw ConfigError("key '" + key + "' repeated in [" + section + "]");
    }
    SolverConfig& s = cfg.solver;
    if (section == "problem") {
      if (key == "name") {
        name = val;
      } else if (key == "spec") {
        cfg.problem = val;
        name.clear();
      } else if (key == "declared_H_scale") {
        cfg.declared_H_scale = to_double(key, val);
      } else {
        problem_params.emplace_back(key, val);
      }
    } else if (section == "solver") {
      if (key == "method") {
        s.method = parse_method(val);
      } else if (key == "nu") {
        s.nu = to_double(key, val);
      } else if (key == "H") {
        s.H_nu = to_double(key, val);
      } else if (key == "H0") {
        s.H0 = to_double(key, val);
      } else if (key == "p") {
        s.p = static_cast<int>(to_integer(key, val));
      } else if (key == "K") {
        s.K = static_cast<int>(to_integer(key, val));
      } else if (key == "eps") {
        s.eps = to_double(key, val);
      } else if (key == "inner_tol") {
        s.inner_tol = to_double(key, val);
      } else if (key == "max_doublings") {
        s.max_doublings = static_cast<int>(to_integer(key, val));
      } else if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(to_integer(key, val));
      } else if (key == "step") {
        s.step = to_double(key, val);
      } else if (key == "gap_every_iteration") {
        s.gap_every_iteration = to_bool(key, val);
      } else if (key == "allow_untested_order") {
        s.allow_untested_order = to_bool(key, val);
      } else {
        throw ConfigError("unknown key '" + key + "' in [solver]");
      }
    } else {
      if (key == "dir") {
        cfg.out_dir = val;
      } else if (key == "wall_time") {
        cfg.solver.record_wall_time = to_bool(key, val);
      } else {
        throw ConfigError("unknown key '" + key + "' in [output]");
      }
    }
  }
  if (!name.empty()) {
    std::string spec = name;
    for (std::size_t i = 0; i < problem_params.size(); ++i) {
      spec += (i == 0 ? ":" : ",") + problem_params[i].first + "=" + problem_params[i].second;
    }
    cfg.problem = spec;
  } else if (!problem_params.empty()) {
    throw ConfigError("problem key '" + problem_params.front().first +
                      "' given without a problem 'name'");
  }
  resolved_problem_params(cfg.problem);  // validates family and keys
  return cfg;
}

RunConfig parse_echo(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream ini;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    ini << line.substr(2) << "\n";
  }
  return parse_run_config(ini.str());
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace hvi
