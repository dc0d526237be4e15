// Command-line front end: solve / optimize / sweep / spectral / verify.
// Exit codes: 0 success, 1 numerical failure, 2 configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poplab/calculus.hpp"
#include "poplab/config.hpp"
#include "poplab/io.hpp"
#include "poplab/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace poplab;

namespace {

constexpr const char* kVersion = "poplab 1.0.0";

struct RunContext {
  Config cfg;
  std::string dir;
  RunManifest manifest;

  explicit RunContext(const Config& c, const std::string& command) : cfg(c) {
    dir = c.output_dir;
    fs::create_directories(dir);
    manifest.command = command;
    manifest.config_echo = c.raw;
    manifest.seed = c.optimizer_seed;
    manifest.versions = kVersion;
  }
  std::string path(const std::string& name) {
    manifest.artifact_paths.push_back(dir + "/" + name);
    return manifest.artifact_paths.back();
  }
  void finish() {
    manifest.timestamp = iso_timestamp_utc();
    write_manifest(dir, manifest);
  }
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

int cmd_solve(const Config& cfg) {
  RunContext ctx(cfg, "solve");
  Grid g = build_grid(cfg.grid_dim, cfg.grid_n);
  ResourceDistribution m = build_resource(g, cfg);
  SolverConfig scfg;
  scfg.tol = cfg.solver_tol;
  PopulationState st = solve_state(g, m, cfg.mu, scfg);
  json j;
  j["mu"] = format_double(cfg.mu);
  j["mass"] = format_double(m.mass());
  j["total_population"] = format_double(st.total_population);
  j["energy"] = format_double(st.energy);
  j["shifted_energy"] = format_double(st.shifted_energy);
  j["residual_norm"] = format_double(st.residual_norm);
  j["newton_iters"] = st.newton_iters;
  write_json(ctx.path("solution.json"), j);
  write_field_csv(ctx.path("theta.csv"), st.theta);
  write_field_csv(ctx.path("m.csv"), m.field());
  ctx.finish();
  std::cout << "total_population = " << format_double(st.total_population)
            << "\n";
  return 0;
}

int cmd_optimize(const Config& cfg) {
  RunContext ctx(cfg, "optimize");
  Grid g = build_grid(cfg.grid_dim, cfg.grid_n);
  OptimizerConfig oc = optimizer_config(cfg);
  OptimizationResult res =
      cfg.criterion == "identity"
          ? optimize(g, cfg.mu, cfg.m0, oc)
          : optimize_general_j(g, cfg.mu, cfg.m0, make_criterion(cfg.criterion),
                               oc);
  json j;
  j["mu"] = format_double(res.mu);
  j["m0"] = format_double(res.m0);
  j["final_objective"] = format_double(res.final_objective);
  j["bang_bang_fraction"] = format_double(res.bang_bang_fraction);
  j["kkt_deviation"] = format_double(res.kkt_deviation);
  j["kkt_sign_consistent"] = res.kkt_sign_consistent;
  j["restarts_used"] = res.restarts_used;
  json trace = json::array();
  for (double v : res.objective_trace) trace.push_back(format_double(v));
  j["objective_trace"] = trace;
  write_json(ctx.path("result.json"), j);
  write_field_csv(ctx.path("m_star.csv"), res.m_star.field());
  ctx.finish();
  std::cout << "objective = " << format_double(res.final_objective) << "\n";
  return 0;
}

int cmd_sweep(const Config& cfg) {
  RunContext ctx(cfg, "sweep");
  std::vector<double> mus;
  for (int k = 0; k < cfg.sweep_points; ++k) {
    double t = cfg.sweep_points == 1
                   ? 0.0
                   : double(k) / double(cfg.sweep_points - 1);
    // descending from mu_max to mu_min, log-spaced
    mus.push_back(std::exp(std::log(cfg.sweep_mu_max) +
                           t * (std::log(cfg.sweep_mu_min) -
                                std::log(cfg.sweep_mu_max))));
  }
  SweepResult res = mu_sweep(mus, cfg.m0, cfg.grid_dim, optimizer_config(cfg));

  std::vector<std::vector<std::string>> rows, plot;
  for (const auto& r : res.records) {
    rows.push_back({format_double(r.mu), format_double(r.bv_norm),
                    format_double(r.tv_norm), format_double(r.objective),
                    format_double(r.objective_minus_m0),
                    format_double(r.bang_bang_fraction),
                    std::to_string(r.grid_n),
                    r.under_resolved ? "1" : "0"});
    if (r.bv_norm > 0.0)
      plot.push_back({format_double(std::log(r.mu)),
                      format_double(std::log(r.bv_norm))});
  }
  write_csv(ctx.path("sweep.csv"),
            {"mu", "bv_norm", "tv_norm", "objective", "objective_minus_m0",
             "bang_bang_fraction", "grid_n", "under_resolved"},
            rows);
  write_csv(ctx.path("loglog.csv"), {"log_mu", "log_bv"}, plot);

  json j;
  if (res.slope) j["slope"] = format_double(*res.slope);
  else j["slope"] = nullptr;
  if (res.delta_hat) j["delta_hat"] = format_double(*res.delta_hat);
  else j["delta_hat"] = nullptr;
  j["bv_monotone_trend"] = res.bv_monotone_trend;
  j["failures"] = res.failures;
  write_json(ctx.path("slope.json"), j);
  ctx.finish();
  if (res.slope)
    std::cout << "slope = " << format_double(*res.slope) << "\n";
  else
    std::cout << "slope undefined (fewer than 2 usable points)\n";
  return res.failures.empty() ? 0 : 1;
}

int cmd_spectral(const Config& cfg) {
  RunContext ctx(cfg, "spectral");
  Grid g = build_grid(cfg.grid_dim, cfg.grid_n);
  ResourceDistribution m = build_resource(g, cfg);
  SolverConfig scfg;
  scfg.tol = cfg.solver_tol;
  PopulationState st = solve_state(g, m, cfg.mu, scfg);
  LinearizedState lin(g, m, st);
  SpectralDecomposition spec = eigenpairs(lin, cfg.spectral_k);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k)
    rows.push_back({std::to_string(k + 1),
                    format_double(spec.eigenvalues[k])});
  write_csv(ctx.path("eigenvalues.csv"), {"k", "lambda"}, rows);
  for (std::size_t k = 0; k < spec.eigenfunctions.size(); ++k)
    write_field_csv(ctx.path("eigenfunction_" + std::to_string(k + 1) + ".csv"),
                    spec.eigenfunctions[k]);
  json j;
  j["lambda_1"] = format_double(spec.eigenvalues.at(0));
  j["principal_state_eigenvalue"] =
      format_double(principal_eigenvalue_state_operator(lin));
  write_json(ctx.path("spectral.json"), j);
  ctx.finish();
  std::cout << "lambda_1 = " << format_double(spec.eigenvalues.at(0)) << "\n";
  return 0;
}

int cmd_verify(const Config& cfg) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  Grid g = build_grid(1, 257);
  std::mt19937_64 rng(cfg.optimizer_seed);
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  {  // constant closed form
    ResourceDistribution m(Field(g, 0.4), 0.4);
    PopulationState st = solve_state(g, m, 0.05);
    bool ok = std::abs(st.total_population - 0.4) < 1e-12;
    report("constant-solution exactness", ok,
           "F=" + format_double(st.total_population));
  }
  {  // energy identity + duality on random fields
    double worst_e = 0.0, worst_d = 0.0;
    for (int t = 0; t < 10; ++t) {
      std::vector<double> mv(g.node_count()), hv(g.node_count());
      for (auto& v : mv) v = unif(rng);
      for (auto& v : hv) v = unif(rng) - 0.5;
      Field mf(g, std::move(mv));
      ResourceDistribution m(mf, integrate(mf));
      PopulationState st = solve_state(g, m, 0.05);
      double rel = std::abs(st.energy + integral_pow3(st.theta) / 6.0) /
                   (1.0 + std::abs(st.energy));
      worst_e = std::max(worst_e, rel);
      LinearizedState lin(g, m, st);
      AdjointState adj = solve_adjoint(lin);
      Field h(g, std::move(hv));
      Field td = gateaux_theta_dot(lin, h);
      double lhs = integrate(td);
      Field pth(g);
      for (std::size_t i = 0; i < g.node_count(); ++i)
        pth[i] = adj.p[i] * st.theta[i] * h[i];
      double rhs = integrate(pth);
      worst_d = std::max(worst_d, std::abs(lhs - rhs) / std::abs(lhs));
    }
    report("energy identity", worst_e < 1e-8, "max rel " + format_double(worst_e));
    report("adjoint duality", worst_d < 1e-8, "max rel " + format_double(worst_d));
  }
  {  // FD gradient check at m == m0
    ResourceDistribution m(Field(g, cfg.m0), cfg.m0);
    PopulationState st = solve_state(g, m, 0.1);
    LinearizedState lin(g, m, st);
    AdjointState adj = solve_adjoint(lin);
    std::vector<double> hv(g.node_count());
    for (auto& v : hv) v = unif(rng) - 0.5;
    Field h(g, std::move(hv));
    double grad = inner(adj.switching, h);
    double best = 1e9;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      std::vector<double> mp(g.node_count()), mm(g.node_count());
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        mp[i] = cfg.m0 + eps * h[i];
        mm[i] = cfg.m0 - eps * h[i];
      }
      Field fp(g, std::move(mp)), fm(g, std::move(mm));
      double Fp = solve_state(g, ResourceDistribution(fp, integrate(fp)), 0.1)
                      .total_population;
      double Fm = solve_state(g, ResourceDistribution(fm, integrate(fm)), 0.1)
                      .total_population;
      double fd = (Fp - Fm) / (2.0 * eps);
      best = std::min(best, std::abs(fd - grad) / std::abs(grad));
    }
    report("finite-difference gradient", best < 1e-4,
           "best rel " + format_double(best));
  }
  {  // spectral closed form, constant m
    Grid gs = build_grid(1, 513);
    double mu = 0.02, m0 = 0.4;
    SpectralDecomposition spec =
        eigenpairs_operator(gs, mu, Field(gs, -m0), 5, "constant");
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
      double exact = mu * M_PI * M_PI * double(k - 1) * double(k - 1) + m0;
      worst = std::max(worst,
                       std::abs(spec.eigenvalues[k - 1] - exact) / exact);
    }
    report("constant-m eigenvalues", worst < 0.005,
           "max rel " + format_double(worst));
  }
  std::cout << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: FAILURES present\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"population laboratory for the logistic-diffusive equation"};
  app.require_subcommand(1);
  std::string config_path;

  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "key=value config file");
    return sub;
  };
  CLI::App* s_solve = add("solve", "solve the steady state for a fixed m");
  CLI::App* s_opt = add("optimize", "maximize the criterion over m");
  CLI::App* s_sweep = add("sweep", "mu sweep measuring BV blow-up");
  CLI::App* s_spec = add("spectral", "eigenpairs of the linearized operator");
  CLI::App* s_verify = add("verify", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    if (s_solve->parsed()) return cmd_solve(cfg);
    if (s_opt->parsed()) return cmd_optimize(cfg);
    if (s_sweep->parsed()) return cmd_sweep(cfg);
    if (s_spec->parsed()) return cmd_spectral(cfg);
    if (s_verify->parsed()) return cmd_verify(cfg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
