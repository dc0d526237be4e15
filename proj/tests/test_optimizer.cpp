#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "poplab/calculus.hpp"
#include "poplab/optimizer.hpp"

using namespace poplab;

TEST_CASE("projection: constant input is already feasible") {
  Grid g = build_grid(1, 101);
  ResourceDistribution p = project_onto_constraints(g, Field(g, 0.4), 0.4);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    CHECK(p.field()[i] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("projection of a scaled indicator") {
  // v = 1 on (0,0.6), mass target 0.5: the shift spreads the deficit evenly,
  // m = (0.5/|A_h|) on the discrete set, 0 elsewhere
  Grid g = build_grid(1, 11);
  Field v(g);
  double measure = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    v[i] = g.x(i) <= 0.6 ? 1.0 : 0.0;
    if (v[i] > 0.5) measure += g.weight(i);
  }
  ResourceDistribution p = project_onto_constraints(g, v, 0.5);
  CHECK(std::fabs(p.mass() - 0.5) < 1e-10);
  const double level = 1.0 - (measure - 0.5) / measure;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    CHECK(p.field()[i] ==
          doctest::Approx(v[i] > 0.5 ? level : 0.0).epsilon(1e-9));
}

TEST_CASE("projection satisfies the variational inequality") {
  Grid g = build_grid(1, 129);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 2.0);
  Field v(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) v[i] = d(rng);
  ResourceDistribution p = project_onto_constraints(g, v, 0.4);
  CHECK(std::fabs(p.mass() - 0.4) < 1e-10);
  CHECK(min_value(p.field()) >= 0.0);
  CHECK(max_abs(p.field()) <= 1.0);
  // <v - P(v), z - P(v)>_W <= 0 for feasible z
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Field z(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) z[i] = u01(rng);
    ResourceDistribution zf = project_onto_constraints(g, z, 0.4);
    double ip = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      ip += g.weight(i) * (v[i] - p.field()[i]) *
            (zf.field()[i] - p.field()[i]);
    CHECK(ip <= 1e-9);
  }
}

TEST_CASE("optimizer improves on the constant control") {
  Grid g = build_grid(1, 129);
  OptimizerConfig cfg;
  cfg.n_restarts = 3;
  cfg.max_iters = 60;
  OptimizationResult res = optimize(g, 0.05, 0.4, cfg);
  // baseline: F(m0) = m0
  CHECK(res.final_objective > 0.4);
  // accepted-step trace never decreases
  for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
    CHECK(res.objective_trace[k] >=
          res.objective_trace[k - 1] - 1e-12);
  CHECK(res.bang_bang_fraction < 0.05);
  CHECK(res.kkt_sign_consistent);
  CHECK(res.restarts_used == 3);
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
  Grid g = build_grid(1, 65);
  OptimizerConfig cfg;
  cfg.n_restarts = 2;
  cfg.max_iters = 30;
  cfg.seed = 777;
  OptimizationResult a = optimize(g, 0.05, 0.3, cfg);
  OptimizationResult b = optimize(g, 0.05, 0.3, cfg);
  CHECK(a.final_objective == b.final_objective);
  REQUIRE(a.m_star.field().size() == b.m_star.field().size());
  for (std::size_t i = 0; i < a.m_star.field().size(); ++i)
    CHECK(a.m_star.field()[i] == b.m_star.field()[i]);
}

TEST_CASE("threshold fixed point returns a bang-bang control") {
  Grid g = build_grid(1, 129);
  ResourceDistribution m0(Field(g, 0.4), 0.4);
  ResourceDistribution tf = threshold_fixed_point(g, m0, 0.05, 0.4);
  CHECK(std::fabs(tf.mass() - 0.4) < 1e-10);
  // all but at most one node at the split level sit at 0 or 1
  int fractional = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double v = tf.field()[i];
    if (v > 1e-9 && v < 1.0 - 1e-9) ++fractional;
  }
  CHECK(fractional <= 1);
  // thresholding the constant control must improve the objective
  CHECK(solve_state(g, tf, 0.05).total_population > 0.4);
}

TEST_CASE("general criterion optimization") {
  Grid g = build_grid(1, 65);
  Criterion quad{[](double t) { return t - 0.25 * t * t; },
                 [](double t) { return 1.0 - 0.5 * t; },
                 [](double) { return -0.5; }};
  OptimizerConfig cfg;
  cfg.n_restarts = 2;
  cfg.max_iters = 30;
  OptimizationResult res = optimize_general_j(g, 0.05, 0.4, quad, cfg);
  // baseline value at the constant control: j(0.4) = 0.36
  CHECK(res.final_objective >= 0.36 - 1e-12);

  Criterion bad{[](double t) { return -t; }, [](double) { return -1.0; },
                [](double) { return 0.0; }};
  CHECK_THROWS_AS(optimize_general_j(g, 0.05, 0.4, bad, cfg),
                  std::invalid_argument);
}

TEST_CASE("optimizer rejects invalid parameters") {
  Grid g = build_grid(1, 65);
  CHECK_THROWS_AS(optimize(g, -1.0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(optimize(g, 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(project_onto_constraints(g, Field(g, 0.5), 1.5),
                  std::invalid_argument);
}
