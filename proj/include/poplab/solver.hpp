#pragma once
// Steady logistic-diffusive solver: mu*Lap(theta) + theta*(m - theta) = 0
// with Neumann boundary, plus the associated variational energies.

#include <functional>
#include <stdexcept>

#include "poplab/grid.hpp"

namespace poplab {

// Box- and mass-constrained resource distribution: 0 <= m <= 1, integral m0.
class ResourceDistribution {
 public:
  ResourceDistribution(Field field, double expected_mass);

  const Field& field() const { return field_; }
  double mass() const { return mass_; }
  // True when every node value is 0 or 1 up to 1e-9.
  bool is_bang_bang() const;

 private:
  Field field_;
  double mass_;
};

struct SolverConfig {
  double tol = 1e-10;          // residual max-norm target
  int max_newton = 200;
  int max_linesearch = 40;
  bool fallback_gradient_flow = true;
};

struct PopulationState {
  Field theta;
  double mu = 0.0;
  double total_population = 0.0;  // F_mu(m)
  double energy = 0.0;            // E_{m,mu}(theta)
  double shifted_energy = 0.0;    // E + (1/6) integral m^3
  int newton_iters = 0;
  double residual_norm = 0.0;
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// mu*Lap(theta) + theta*(m - theta), evaluated nodewise.
Field state_residual(const Field& theta, const Field& m, double mu);

PopulationState solve_state(const Grid& g, const ResourceDistribution& m,
                            double mu, const SolverConfig& cfg = {});

// Projected gradient descent (Barzilai-Borwein steps with monotone
// safeguard) on the energy, independent of the Newton path.
Field minimize_energy_oracle(const Grid& g, const ResourceDistribution& m,
                             double mu);

// E_{m,mu}(u) = mu/2 |grad u|^2 - 1/2 m u^2 + 1/3 u^3; u must be >= 0.
double energy(const Grid& g, const ResourceDistribution& m, double mu,
              const Field& u);
double shifted_energy(const Grid& g, const ResourceDistribution& m, double mu,
                      const Field& u);

struct Criterion {
  std::function<double(double)> j, jp, jpp;
};
Criterion identity_criterion();

// integral of j(theta); rejects j' <= 0 on the observed range of theta.
double criterion_j(const PopulationState& state, const Criterion& j);

}  // namespace poplab
