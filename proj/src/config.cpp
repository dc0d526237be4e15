#include "poplab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "poplab/calculus.hpp"

namespace poplab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

// "a:b,c:d" -> [(a,b),(c,d)]
IntervalList parse_intervals(const std::string& key, const std::string& v) {
  IntervalList out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError(key + ": expected a:b pairs separated by commas");
    out.emplace_back(parse_real(key, trim(item.substr(0, colon))),
                     parse_real(key, trim(item.substr(colon + 1))));
  }
  if (out.empty()) throw ConfigError(key + ": empty interval list");
  return out;
}

std::vector<std::array<double, 4>> parse_rects(const std::string& key,
                                               const std::string& v) {
  std::vector<std::array<double, 4>> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::stringstream rs(item);
    std::string num;
    std::array<double, 4> r{};
    int k = 0;
    while (std::getline(rs, num, ',')) {
      if (k >= 4) throw ConfigError(key + ": rectangle needs 4 numbers");
      r[k++] = parse_real(key, trim(num));
    }
    if (k != 4) throw ConfigError(key + ": rectangle needs 4 numbers");
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError(key + ": empty rectangle list");
  return out;
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": empty key or value");
    c.raw[key] = val;

    if (key == "grid.n") c.grid_n = int(parse_int(key, val));
    else if (key == "grid.dim") c.grid_dim = int(parse_int(key, val));
    else if (key == "problem.mu") c.mu = parse_real(key, val);
    else if (key == "problem.m0") c.m0 = parse_real(key, val);
    else if (key == "solver.tol") c.solver_tol = parse_real(key, val);
    else if (key == "optimizer.restarts")
      c.optimizer_restarts = int(parse_int(key, val));
    else if (key == "optimizer.seed")
      c.optimizer_seed = std::uint64_t(parse_int(key, val));
    else if (key == "optimizer.max_iters")
      c.optimizer_max_iters = int(parse_int(key, val));
    else if (key == "sweep.mu_min") c.sweep_mu_min = parse_real(key, val);
    else if (key == "sweep.mu_max") c.sweep_mu_max = parse_real(key, val);
    else if (key == "sweep.points") c.sweep_points = int(parse_int(key, val));
    else if (key == "criterion.j") c.criterion = val;
    else if (key == "resource.kind") c.resource_kind = val;
    else if (key == "resource.value") c.resource_value = parse_real(key, val);
    else if (key == "resource.intervals")
      c.resource_intervals = parse_intervals(key, val);
    else if (key == "resource.rectangles")
      c.resource_rects = parse_rects(key, val);
    else if (key == "resource.csv") c.resource_csv = val;
    else if (key == "output.dir") c.output_dir = val;
    else if (key == "spectral.k") c.spectral_k = int(parse_int(key, val));
    else throw ConfigError("unknown key '" + key + "'");
  }

  if (!(c.m0 > 0.0 && c.m0 < 1.0))
    throw ConfigError("problem.m0: m0 must lie in (0,1)");
  if (!(c.mu > 0.0)) throw ConfigError("problem.mu: mu must be positive");
  if (c.grid_dim != 1 && c.grid_dim != 2)
    throw ConfigError("grid.dim: must be 1 or 2");
  if (c.grid_n < 8) throw ConfigError("grid.n: must be at least 8");
  if (!(c.solver_tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (c.optimizer_restarts < 1)
    throw ConfigError("optimizer.restarts: must be at least 1");
  if (c.optimizer_max_iters < 1)
    throw ConfigError("optimizer.max_iters: must be at least 1");
  if (c.sweep_points < 1) throw ConfigError("sweep.points: must be at least 1");
  if (!(c.sweep_mu_min > 0.0 && c.sweep_mu_max >= c.sweep_mu_min))
    throw ConfigError("sweep.mu_min/mu_max: need 0 < mu_min <= mu_max");
  if (c.criterion != "identity" && c.criterion != "quadratic" &&
      c.criterion != "log1p")
    throw ConfigError("criterion.j: unknown preset '" + c.criterion + "'");
  if (c.resource_kind != "constant" && c.resource_kind != "intervals" &&
      c.resource_kind != "rectangles" && c.resource_kind != "csv")
    throw ConfigError("resource.kind: unknown kind '" + c.resource_kind + "'");
  if (c.resource_value >= 0.0 && !(c.resource_value > 0.0 && c.resource_value <= 1.0))
    throw ConfigError("resource.value: must lie in (0,1]");
  if (c.spectral_k < 1) throw ConfigError("spectral.k: must be at least 1");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

OptimizerConfig optimizer_config(const Config& c) {
  OptimizerConfig oc;
  oc.max_iters = c.optimizer_max_iters;
  oc.n_restarts = c.optimizer_restarts;
  oc.seed = c.optimizer_seed;
  oc.solver.tol = c.solver_tol;
  return oc;
}

ResourceDistribution build_resource(const Grid& g, const Config& c) {
  if (c.resource_kind == "constant") {
    double v = c.resource_value >= 0.0 ? c.resource_value : c.m0;
    return ResourceDistribution(Field(g, v), v);
  }
  if (c.resource_kind == "intervals") {
    if (g.dim() != 1)
      throw ConfigError("resource.intervals: needs grid.dim = 1");
    if (c.resource_intervals.empty())
      throw ConfigError("resource.intervals: missing");
    Field m = indicator_1d(g, c.resource_intervals);
    return ResourceDistribution(m, integrate(m));
  }
  if (c.resource_kind == "rectangles") {
    if (g.dim() != 2)
      throw ConfigError("resource.rectangles: needs grid.dim = 2");
    if (c.resource_rects.empty())
      throw ConfigError("resource.rectangles: missing");
    Field m(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double x = g.x(i), y = g.y(i);
      for (const auto& r : c.resource_rects)
        if (x >= r[0] && x <= r[1] && y >= r[2] && y <= r[3]) {
          m[i] = 1.0;
          break;
        }
    }
    return ResourceDistribution(m, integrate(m));
  }
  // csv
  std::ifstream in(c.resource_csv);
  if (!in)
    throw ConfigError("resource.csv: cannot open '" + c.resource_csv + "'");
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    std::string t;
    for (char ch : line)
      if (ch != '\r') t += ch;
    if (t.empty()) continue;
    vals.push_back(parse_real("resource.csv", t));
  }
  if (vals.size() != g.node_count())
    throw ConfigError("resource.csv: expected " +
                      std::to_string(g.node_count()) + " values, got " +
                      std::to_string(vals.size()));
  Field m(g, std::move(vals));
  return ResourceDistribution(m, integrate(m));
}

Criterion make_criterion(const std::string& name) {
  if (name == "identity") return identity_criterion();
  if (name == "quadratic")
    return Criterion{[](double t) { return t - 0.25 * t * t; },
                     [](double t) { return 1.0 - 0.5 * t; },
                     [](double) { return -0.5; }};
  if (name == "log1p")
    return Criterion{[](double t) { return std::log1p(t); },
                     [](double t) { return 1.0 / (1.0 + t); },
                     [](double t) { return -1.0 / ((1.0 + t) * (1.0 + t)); }};
  throw ConfigError("criterion.j: unknown preset '" + name + "'");
}

}  // namespace poplab
