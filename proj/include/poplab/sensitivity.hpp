#pragma once
// Adjoint state, switching function and first/second Gateaux derivatives of
// the total-population functional. All linear solves share one factorization
// of L_m = -mu*Lap - (m - 2*theta).

#include <optional>

#include "poplab/linops.hpp"
#include "poplab/solver.hpp"

namespace poplab {

enum class CriterionTag { total_population, general_j };

struct AdjointState {
  Field p;          // adjoint multiplier, positive
  CriterionTag criterion;
  Field switching;  // theta * p
};

struct PositivityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Snapshot of (m, mu, theta) with a reusable factorization of L_m.
class LinearizedState {
 public:
  LinearizedState(const Grid& g, const ResourceDistribution& m,
                  const PopulationState& state);

  const Grid& grid() const { return *grid_; }
  const ResourceDistribution& resources() const { return *m_; }
  const PopulationState& state() const { return *state_; }
  // Solves L_m x = rhs.
  Field solve(const Field& rhs) const { return op_.solve(rhs); }

 private:
  const Grid* grid_;
  const ResourceDistribution* m_;
  const PopulationState* state_;
  LinearizedOperator op_;
};

AdjointState solve_adjoint(const LinearizedState& lin,
                           CriterionTag tag = CriterionTag::total_population,
                           const Criterion* j = nullptr);

// Solves L_m theta_dot = h * theta.
Field gateaux_theta_dot(const LinearizedState& lin, const Field& h);
// Solves L_m theta_ddot = 2*h*theta_dot - 2*theta_dot^2.
Field gateaux_theta_ddot(const LinearizedState& lin, const Field& h,
                         const Field& theta_dot);

// Second derivative through the energy form
//   2*mu*int u |grad theta_dot|^2 - 2*int u*V*theta_dot^2,
// u = p/theta, V = m - theta + mu*Lap(u)/(2u). Algebraically equal to
// int theta_ddot; the discrete forms agree to round-off.
double second_derivative_energy_form(const LinearizedState& lin,
                                     const AdjointState& adj, const Field& h,
                                     const Field& theta_dot);

struct DerivativeReport {
  Field direction;
  double first_deriv;               // int theta_dot = int p*theta*h
  double second_deriv_direct;       // int theta_ddot
  double second_deriv_energy_form;
  Field theta_dot;
  Field u_ratio;   // p / theta
  Field potential; // V
};

DerivativeReport derivative_report(const LinearizedState& lin,
                                   const AdjointState& adj, const Field& h);

struct KktReport {
  double c_estimate = 0.0;
  double max_deviation_inactive = 0.0;  // max |theta*p - c| on {tol<m<1-tol}
  std::size_t inactive_count = 0;
  bool sign_consistent = false;  // theta*p >= c on {m=1}, <= c on {m=0}
  double sign_violation = 0.0;   // worst signed violation magnitude
};

KktReport first_order_kkt_report(const ResourceDistribution& m,
                                 const PopulationState& state,
                                 const AdjointState& adj,
                                 double tol_active = 1e-3);

// The potential field V = m - theta + mu*Lap(u)/(2u).
Field switching_potential(const LinearizedState& lin, const AdjointState& adj);

}  // namespace poplab
