#pragma once
// Flat key=value configuration with dotted section names, validated against a
// fixed schema. Unknown keys and out-of-range values are reported by name.

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "poplab/fragmentation.hpp"

namespace poplab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::map<std::string, std::string> raw;  // echoed into the manifest

  int grid_n = 257;
  int grid_dim = 1;
  double mu = 1e-2;
  double m0 = 0.4;
  double solver_tol = 1e-10;
  int optimizer_restarts = 5;
  std::uint64_t optimizer_seed = 42;
  int optimizer_max_iters = 200;
  double sweep_mu_min = 1e-4;
  double sweep_mu_max = 1e-1;
  int sweep_points = 12;
  std::string criterion = "identity";  // identity | quadratic | log1p
  std::string resource_kind = "constant";  // constant|intervals|rectangles|csv
  double resource_value = -1.0;            // < 0 means "use m0"
  IntervalList resource_intervals;
  std::vector<std::array<double, 4>> resource_rects;  // x0,x1,y0,y1
  std::string resource_csv;
  std::string output_dir = "runs/out";
  int spectral_k = 10;
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

OptimizerConfig optimizer_config(const Config& c);

// Resource field from the config: constant, interval/rectangle indicator, or
// an external field CSV (one value per line, row-major).
ResourceDistribution build_resource(const Grid& g, const Config& c);

// Criterion presets: identity, quadratic (t - t^2/4), log1p (log(1+t)).
Criterion make_criterion(const std::string& name);

}  // namespace poplab
