#pragma once
// Maximization of the total population (or a general increasing criterion)
// over the box-and-mass constraint set: projected gradient ascent on the
// switching function theta*p with Armijo backtracking, polished by a bathtub
// thresholding iteration, multi-started.

#include <cstdint>
#include <vector>

#include "poplab/sensitivity.hpp"

namespace poplab {

struct OptimizerConfig {
  int max_iters = 200;
  int n_restarts = 5;
  std::uint64_t seed = 42;
  double objective_tol = 1e-11;
  int threshold_max_iter = 60;
  SolverConfig solver;
};

struct OptimizationResult {
  ResourceDistribution m_star;
  std::vector<double> objective_trace;  // accepted iterates, nondecreasing
  double final_objective = 0.0;
  double bang_bang_fraction = 0.0;  // measure of {eps < m < 1-eps}, eps=1e-3
  double kkt_deviation = 0.0;
  bool kkt_sign_consistent = false;
  int restarts_used = 0;
  double mu = 0.0;
  double m0 = 0.0;
};

// Euclidean projection onto {0 <= m <= 1, integral m = m0}: clip(v - l, 0, 1)
// with the shift l found by bisection.
ResourceDistribution project_onto_constraints(const Grid& g, const Field& v,
                                              double m0);

OptimizationResult optimize(const Grid& g, double mu, double m0,
                            const OptimizerConfig& cfg = {});

OptimizationResult optimize_general_j(const Grid& g, double mu, double m0,
                                      const Criterion& j,
                                      const OptimizerConfig& cfg = {});

// Bathtub iteration m <- 1_{theta*p > c} with c matched to the mass; returns
// the fixed point (or the best iterate if a period-2 cycle appears).
ResourceDistribution threshold_fixed_point(const Grid& g,
                                           const ResourceDistribution& m_init,
                                           double mu, double m0,
                                           int max_iter = 60);

}  // namespace poplab
