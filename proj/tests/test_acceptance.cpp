// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "poplab/calculus.hpp"
#include "poplab/fragmentation.hpp"
#include "poplab/io.hpp"
#include "poplab/spectral.hpp"

using namespace poplab;

namespace {

int g_failures = 0;
bool g_efficiency_ok = true;  // flips if any 1D solve violates F <= 3*int m

void line(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%2d] %-34s %s%s%s\n", idx, name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

ResourceDistribution random_resource(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  Field m(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) m[i] = d(rng);
  return ResourceDistribution(m, integrate(m));
}

Field random_direction(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  Field h(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) h[i] = d(rng);
  return h;
}

PopulationState solve_tracked(const Grid& g, const ResourceDistribution& m,
                              double mu) {
  PopulationState st = solve_state(g, m, mu);
  if (g.dim() == 1 && st.total_population > 3.0 * m.mass() + 1e-9)
    g_efficiency_ok = false;
  return st;
}

std::string fmt(double v) { return format_double(v); }

// --- criteria -------------------------------------------------------------

void c1_constant_exactness() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  Grid g = build_grid(1, 257);
  for (double m0 : {0.3, 0.4, 0.7}) {
    ResourceDistribution m(Field(g, m0), m0);
    PopulationState st = solve_tracked(g, m, 0.05);
    LinearizedState lin(g, m, st);
    AdjointState adj = solve_adjoint(lin);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      worst = std::max(worst, std::fabs(st.theta[i] - m0));
      worst = std::max(worst, std::fabs(adj.p[i] - 1.0 / m0));
    }
    worst = std::max(worst, std::fabs(st.total_population - m0));
  }
  ok = worst < 1e-12;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0).count();
  ok = ok && secs < 1.0;
  line(1, "constant-solution exactness", ok,
       "worst dev " + fmt(worst) + ", " + fmt(secs) + " s");
}

void c2_energy_identity() {
  double worst = 0.0;
  int idx = 0;
  for (int dim : {1, 2}) {
    Grid g = build_grid(dim, dim == 1 ? 257 : 65);
    for (int t = 0; t < 10; ++t) {
      ResourceDistribution m = random_resource(g, 1000 + idx++);
      for (double mu : {1e-2, 1e-1}) {
        PopulationState st = solve_tracked(g, m, mu);
        double rhs = -integral_pow3(st.theta) / 6.0;
        worst = std::max(worst,
                         std::fabs(st.energy - rhs) / (1.0 + std::fabs(rhs)));
      }
    }
  }
  line(2, "energy identity", worst < 1e-8, "max rel " + fmt(worst));
}

void c3_oracle_equivalence() {
  double worst = 0.0;
  Grid g = build_grid(1, 129);
  for (int t = 0; t < 10; ++t) {
    ResourceDistribution m = random_resource(g, 2000 + t);
    double mu = 0.05;
    PopulationState st = solve_tracked(g, m, mu);
    Field oracle = minimize_energy_oracle(g, m, mu);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      worst = std::max(worst, std::fabs(st.theta[i] - oracle[i]));
  }
  line(3, "solver oracle equivalence", worst < 1e-6, "max Linf " + fmt(worst));
}

void c4_adjoint_duality() {
  Grid g = build_grid(1, 129);
  const double mu = 0.08;
  double worst_dual = 0.0, worst_dsd = 0.0;
  for (int t = 0; t < 100; ++t) {
    ResourceDistribution m = random_resource(g, 3000 + t);
    PopulationState st = solve_tracked(g, m, mu);
    LinearizedState lin(g, m, st);
    AdjointState adj = solve_adjoint(lin);
    Field h = random_direction(g, 4000 + t);
    Field td = gateaux_theta_dot(lin, h);
    double lhs = integrate(td);
    Field integrand(g);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      integrand[i] = adj.p[i] * st.theta[i] * h[i];
    worst_dual = std::max(
        worst_dual, std::fabs(lhs - integrate(integrand)) / std::fabs(lhs));
    if (t < 10) {
      DerivativeReport rep = derivative_report(lin, adj, h);
      worst_dsd = std::max(
          worst_dsd,
          std::fabs(rep.second_deriv_direct - rep.second_deriv_energy_form) /
              std::max(std::fabs(rep.second_deriv_direct), 1e-30));
    }
  }

  // FD checks at one instance, best epsilon from {1e-3, 1e-4, 1e-5}
  ResourceDistribution m = random_resource(g, 3500);
  PopulationState st = solve_tracked(g, m, mu);
  LinearizedState lin(g, m, st);
  AdjointState adj = solve_adjoint(lin);
  Field h = random_direction(g, 4500);
  DerivativeReport rep = derivative_report(lin, adj, h);
  double best_g = 1e9, best_h = 1e9;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    Field mp(g), mm(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      mp[i] = m.field()[i] + eps * h[i];
      mm[i] = m.field()[i] - eps * h[i];
    }
    double Fp =
        solve_tracked(g, ResourceDistribution(mp, integrate(mp)), mu)
            .total_population;
    double Fm =
        solve_tracked(g, ResourceDistribution(mm, integrate(mm)), mu)
            .total_population;
    double fd1 = (Fp - Fm) / (2.0 * eps);
    double fd2 = (Fp - 2.0 * st.total_population + Fm) / (eps * eps);
    best_g =
        std::min(best_g, std::fabs(fd1 - rep.first_deriv) / std::fabs(fd1));
    best_h = std::min(best_h, std::fabs(fd2 - rep.second_deriv_direct) /
                                  std::fabs(fd2));
  }
  bool ok = worst_dual < 1e-8 && best_g < 1e-4 && best_h < 1e-3 &&
            worst_dsd < 1e-6;
  line(4, "adjoint duality + FD + 2nd form", ok,
       "dual " + fmt(worst_dual) + ", grad " + fmt(best_g) + ", hess " +
           fmt(best_h) + ", dsd " + fmt(worst_dsd));
}

void c5_spectral_closed_form() {
  Grid g = build_grid(1, 513);
  const double mu = 0.02, m0 = 0.4;
  SpectralDecomposition spec =
      eigenpairs_operator(g, mu, Field(g, -m0), 10, "constant");
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    double exact = mu * M_PI * M_PI * double(k - 1) * double(k - 1) + m0;
    worst =
        std::max(worst, std::fabs(spec.eigenvalues[k - 1] - exact) / exact);
  }
  line(5, "constant-m spectral closed form", worst < 0.005,
       "max rel " + fmt(worst));
}

void c6_positivity_suite() {
  bool ok = true;
  std::string detail;
  for (int dim : {1, 2}) {
    Grid g = build_grid(dim, dim == 1 ? 257 : 49);
    for (int t = 0; t < 3; ++t) {
      ResourceDistribution m = random_resource(g, 5000 + 10 * dim + t);
      PopulationState st = solve_tracked(g, m, 0.05);
      LinearizedState lin(g, m, st);
      AdjointState adj = solve_adjoint(lin);
      SpectralDecomposition spec = eigenpairs(lin, 1);
      double lam0 = principal_eigenvalue_state_operator(lin);
      if (!(spec.eigenvalues[0] > 0.0) || !(min_value(adj.p) > 0.0) ||
          !(std::fabs(lam0) < 1e-6)) {
        ok = false;
        detail = "lambda1 " + fmt(spec.eigenvalues[0]) + ", state lam " +
                 fmt(lam0) + ", min p " + fmt(min_value(adj.p));
      }
    }
  }
  line(6, "positivity suite", ok, detail);
}

void c7_bang_bang_certificate() {
  Grid g = build_grid(1, 257);
  ResourceDistribution m(Field(g, 0.4), 0.4);
  BangBangCertificate cert = bang_bang_certificate(g, m, 0.1);
  bool ok = cert.applicable && cert.certified &&
            cert.second_derivative > 0.0 && cert.delta_F > 0.0;
  line(7, "bang-bang ascent certificate", ok,
       "ddF " + fmt(cert.second_derivative) + ", dF " + fmt(cert.delta_F) +
           ", K " + std::to_string(cert.K_used));
}

void c8_optimizer_bang_bang() {
  bool ok = true;
  std::string detail;
  for (double mu : {0.1, 0.01, 0.001}) {
    // at least 257 nodes so the single fractional bathtub node (measure h)
    // cannot dominate the bang-bang fraction
    Grid g = build_grid(1, std::max(grid_n_for_mu(mu), 257));
    OptimizerConfig cfg;
    OptimizationResult res = optimize(g, mu, 0.4, cfg);
    if (!(res.bang_bang_fraction < 0.01) || !res.kkt_sign_consistent)
      ok = false;
    detail += "mu=" + fmt(mu) + ": frac " + fmt(res.bang_bang_fraction) +
              (res.kkt_sign_consistent ? " kkt+ " : " kkt- ");
  }
  line(8, "optimizers are bang-bang", ok, detail);
}

std::string sweep_csv(const SweepResult& res) {
  std::ostringstream out;
  out << "mu,bv_norm,tv_norm,objective,objective_minus_m0,"
         "bang_bang_fraction,grid_n\r\n";
  for (const auto& r : res.records)
    out << fmt(r.mu) << ',' << fmt(r.bv_norm) << ',' << fmt(r.tv_norm) << ','
        << fmt(r.objective) << ',' << fmt(r.objective_minus_m0) << ','
        << fmt(r.bang_bang_fraction) << ',' << r.grid_n << "\r\n";
  return out.str();
}

SweepResult run_reference_sweep() {
  std::vector<double> mus;
  for (int k = 0; k < 12; ++k) {
    double t = double(k) / 11.0;
    mus.push_back(std::exp(std::log(1e-1) + t * (std::log(1e-4) -
                                                  std::log(1e-1))));
  }
  OptimizerConfig cfg;
  return mu_sweep(mus, 0.4, 1, cfg);
}

void c9_c13_fragmentation_and_determinism() {
  SweepResult res = run_reference_sweep();
  bool ok9 = res.failures.empty() && res.slope.has_value() &&
             *res.slope <= -0.35 && res.delta_hat.has_value() &&
             *res.delta_hat >= 0.01;
  line(9, "fragmentation scaling sweep", ok9,
       std::string("slope ") + (res.slope ? fmt(*res.slope) : "undefined") +
           ", delta " + (res.delta_hat ? fmt(*res.delta_hat) : "undefined") +
           ", failures " + std::to_string(res.failures.size()));

  SweepResult res2 = run_reference_sweep();
  bool ok13 = sweep_csv(res) == sweep_csv(res2);
  line(13, "sweep determinism (byte-identical)", ok13, "");
}

void c10_energy_inequalities() {
  bool ok = true;
  std::string detail;
  // first inequality of the L1 lower bound on 20 bang-bang instances
  Grid g = build_grid(1, 1025);
  std::mt19937_64 rng(6001);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double worst_margin = 1e300;
  for (int t = 0; t < 20; ++t) {
    int parts = 1 + int(rng() % 3);
    IntervalList iv;
    double cursor = 0.05 + 0.1 * d(rng);
    for (int p = 0; p < parts && cursor < 0.8; ++p) {
      double len = 0.05 + 0.15 * d(rng);
      iv.push_back({cursor, std::min(cursor + len, 0.9)});
      cursor += len + 0.06 + 0.1 * d(rng);
    }
    Field mf = indicator_1d(g, iv);
    L1BoundReport rep = l1_energy_bound_check(
        g, ResourceDistribution(mf, integrate(mf)), 1e-2);
    worst_margin = std::min(worst_margin, rep.margin);
  }
  if (worst_margin < -1e-12) ok = false;

  // Modica bounds: 10 interval sets x eta in {0.2, 0.1, 0.05}
  for (int t = 0; t < 10 && ok; ++t) {
    int parts = 1 + int(rng() % 2);
    IntervalList iv;
    double cursor = 0.08 + 0.1 * d(rng);
    for (int p = 0; p < parts && cursor < 0.8; ++p) {
      double len = 0.08 + 0.1 * d(rng);
      iv.push_back({cursor, std::min(cursor + len, 0.9)});
      cursor += len + 0.1 + 0.1 * d(rng);
    }
    for (double eta : {0.2, 0.1, 0.05}) {
      ModicaProfile prof = modica_test_function(g, iv, eta);
      if (prof.gradient_term > 2.0 * prof.interior_per / eta * (1 + 1e-12) ||
          prof.potential_term > 2.0 * eta * prof.interior_per * (1 + 1e-12))
        ok = false;
    }
  }

  // E~(theta)/sqrt(mu) uniformly bounded for a fixed set
  Grid gf = build_grid(1, 4097);
  double worst_ratio = 0.0;
  for (double mu : {1e-2, 1e-3, 1e-4}) {
    ModicaBoundReport rep = modica_energy_bound_check(gf, {{0.0, 0.5}}, mu);
    if (rep.shifted_energy_state > rep.shifted_energy_profile + 1e-10)
      ok = false;
    worst_ratio = std::max(worst_ratio, rep.c1_measured);
  }
  if (worst_ratio > 3.0) ok = false;
  line(10, "energy-inequality suite", ok,
       "min margin " + fmt(worst_margin) + ", max C1 " + fmt(worst_ratio));
}

void c11_mollifier() {
  Grid g = build_grid(1, 1025);
  double d0 = 0.0;
  for (const IntervalList& iv :
       {IntervalList{{0.25, 0.75}}, IntervalList{{0.0, 0.5}},
        IntervalList{{0.2, 0.4}, {0.6, 0.8}}}) {
    Field m = indicator_1d(g, iv);
    MollifierReport rep = mollifier_contraction_check(g, m, {0.01, 0.02, 0.04});
    d0 = std::max(d0, rep.d0);
  }
  line(11, "mollifier contraction d0 <= 1", d0 <= 1.0, "d0 " + fmt(d0));
}

void c12_efficiency() {
  line(12, "1D efficiency bound F <= 3*int m", g_efficiency_ok, "");
}

}  // namespace

int main() {
  c1_constant_exactness();
  c2_energy_identity();
  c3_oracle_equivalence();
  c4_adjoint_duality();
  c5_spectral_closed_form();
  c6_positivity_suite();
  c7_bang_bang_certificate();
  c8_optimizer_bang_bang();
  c9_c13_fragmentation_and_determinism();
  c10_energy_inequalities();
  c11_mollifier();
  c12_efficiency();
  std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES present");
  return g_failures == 0 ? 0 : 1;
}
