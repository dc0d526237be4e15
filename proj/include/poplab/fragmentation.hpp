#pragma once
// Small-diffusivity laboratory: Modica-style ramp profiles bounding the
// shifted energy by sqrt(mu) * perimeter, L1 closeness of theta to a
// bang-bang m, mollifier contraction ratios, and the mu-sweep measuring the
// BV blow-up of optimizers.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poplab/optimizer.hpp"

namespace poplab {

using IntervalList = std::vector<std::pair<double, double>>;

// Pointwise signed distance to the interior boundary of the union A of the
// intervals: negative inside A, positive outside. Endpoints at 0 or 1 are
// domain boundary, not part of the interior boundary.
Field signed_distance_1d(const Grid& g, const IntervalList& intervals);

// Nodewise indicator of A (nodes with signed distance <= 0).
Field indicator_1d(const Grid& g, const IntervalList& intervals);

// Number of interval endpoints strictly inside (0,1).
int interior_perimeter(const IntervalList& intervals);

struct ModicaProfile {
  IntervalList set_endpoints;
  double eta = 0.0;
  Field u_eps;
  Field signed_distance;
  double gradient_term = 0.0;   // integral (u_eps')^2
  double potential_term = 0.0;  // integral psi_eps
  double interior_per = 0.0;
};

// u_eps = phi(h_A) with phi the unit ramp of width eta; asserts the bounds
// gradient_term <= 2*Per_int/eta and potential_term <= 2*eta*Per_int.
ModicaProfile modica_test_function(const Grid& g, const IntervalList& intervals,
                                   double eta);

struct ModicaBoundReport {
  double mu = 0.0;
  double eta = 0.0;  // sqrt(mu) unless overridden
  double shifted_energy_state = 0.0;    // E~(theta)
  double shifted_energy_profile = 0.0;  // E~(u_eps)
  double c1_measured = 0.0;             // E~(theta) / (sqrt(mu)*Per_int)
  bool under_resolved = false;          // h > 0.1*eta
};

ModicaBoundReport modica_energy_bound_check(const Grid& g,
                                            const IntervalList& intervals,
                                            double mu,
                                            double eta_override = 0.0);

struct L1BoundReport {
  double step1_lhs = 0.0;   // integral (theta/3 + m/6)(theta - m)^2
  double step1_rhs = 0.0;   // E~(theta)
  double margin = 0.0;      // rhs - lhs (= mu/2 * Dirichlet energy, >= 0)
  double l1_error = 0.0;    // ||theta - m||_L1
  double m0_measured = 0.0; // l1_error / lhs^{1/3}
};

// Requires bang-bang m (node values in {0,1}).
L1BoundReport l1_energy_bound_check(const Grid& g,
                                    const ResourceDistribution& m, double mu);

struct MollifierReport {
  std::vector<double> eps;
  std::vector<double> ratio;  // ||m - m_eps||_L1 / (eps * TV(m))
  double d0 = 0.0;            // max ratio
};

MollifierReport mollifier_contraction_check(const Grid& g, const Field& m,
                                      const std::vector<double>& eps_list);

struct SweepRecord {
  double mu = 0.0;
  double bv_norm = 0.0;
  double tv_norm = 0.0;
  double objective = 0.0;
  double objective_minus_m0 = 0.0;
  double bang_bang_fraction = 0.0;
  int grid_n = 0;
  bool under_resolved = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;       // in mu_list order
  std::optional<double> slope;            // log BV vs log mu, smallest decade
  std::optional<double> delta_hat;        // min(objective - m0), 3 smallest mu
  std::vector<std::string> failures;      // per-mu messages, sweep continues
  bool bv_monotone_trend = true;          // nonincreasing in mu up to 10%
};

// Smallest n = 2^k + 1 with spacing 1/(n-1) <= 0.1*sqrt(mu), at least 65.
int grid_n_for_mu(double mu);

SweepResult mu_sweep(const std::vector<double>& mu_list, double m0, int dim,
                     const OptimizerConfig& cfg = {});

}  // namespace poplab
