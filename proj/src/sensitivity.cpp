#include "poplab/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "poplab/calculus.hpp"

namespace poplab {

namespace {

Field linearized_potential(const ResourceDistribution& m,
                           const PopulationState& state) {
  Field q = m.field();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] -= 2.0 * state.theta[i];
  return q;
}

}  // namespace

LinearizedState::LinearizedState(const Grid& g, const ResourceDistribution& m,
                                 const PopulationState& state)
    : grid_(&g),
      m_(&m),
      state_(&state),
      op_(g, state.mu, linearized_potential(m, state)) {}

AdjointState solve_adjoint(const LinearizedState& lin, CriterionTag tag,
                           const Criterion* j) {
  const PopulationState& st = lin.state();
  Field rhs(lin.grid(), 1.0);
  if (tag == CriterionTag::general_j) {
    if (!j) throw std::invalid_argument("solve_adjoint: general_j needs j'");
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      rhs[i] = j->jp(st.theta[i]);
      if (rhs[i] <= 0.0)
        throw std::invalid_argument("solve_adjoint: j' <= 0 on theta range");
    }
  }
  Field p = lin.solve(rhs);
  if (min_value(p) <= 0.0)
    throw PositivityViolation(
        "solve_adjoint: adjoint lost positivity (coarse grid or lambda_1 <= 0)");
  Field sw(lin.grid());
  for (std::size_t i = 0; i < sw.size(); ++i) sw[i] = st.theta[i] * p[i];
  return AdjointState{std::move(p), tag, std::move(sw)};
}

Field gateaux_theta_dot(const LinearizedState& lin, const Field& h) {
  const Field& theta = lin.state().theta;
  Field rhs(lin.grid());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = h[i] * theta[i];
  return lin.solve(rhs);
}

Field gateaux_theta_ddot(const LinearizedState& lin, const Field& h,
                         const Field& theta_dot) {
  Field rhs(lin.grid());
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = 2.0 * h[i] * theta_dot[i] - 2.0 * theta_dot[i] * theta_dot[i];
  return lin.solve(rhs);
}

Field switching_potential(const LinearizedState& lin, const AdjointState& adj) {
  const PopulationState& st = lin.state();
  const Field& mf = lin.resources().field();
  Field u(lin.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (st.theta[i] < 1e-12 || adj.p[i] < 1e-12)
      throw PositivityViolation("switching_potential: division guard tripped");
    u[i] = adj.p[i] / st.theta[i];
  }
  Field lap_u = apply_neumann_laplacian(u);
  Field v(lin.grid());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = mf[i] - st.theta[i] + st.mu * lap_u[i] / (2.0 * u[i]);
  return v;
}

double second_derivative_energy_form(const LinearizedState& lin,
                                     const AdjointState& adj, const Field& h,
                                     const Field& theta_dot) {
  const PopulationState& st = lin.state();
  const Field& mf = lin.resources().field();
  const auto& w = lin.grid().weights();
  Field u(lin.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (st.theta[i] < 1e-12 || adj.p[i] < 1e-12)
      throw PositivityViolation("energy form: division guard tripped");
    u[i] = adj.p[i] / st.theta[i];
  }
  Field lap_u = apply_neumann_laplacian(u);
  const double grad = gradient_form(u, theta_dot, theta_dot);
  double pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double node_pot =
        st.mu * lap_u[i] + 2.0 * u[i] * (mf[i] - st.theta[i]);
    pot += w[i] * node_pot * theta_dot[i] * theta_dot[i];
  }
  (void)h;
  return 2.0 * st.mu * grad - pot;
}

DerivativeReport derivative_report(const LinearizedState& lin,
                                   const AdjointState& adj, const Field& h) {
  Field theta_dot = gateaux_theta_dot(lin, h);
  Field theta_ddot = gateaux_theta_ddot(lin, h, theta_dot);
  const double first = integrate(theta_dot);
  const double direct = integrate(theta_ddot);
  const double form = second_derivative_energy_form(lin, adj, h, theta_dot);
  const PopulationState& st = lin.state();
  Field u(lin.grid());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = adj.p[i] / st.theta[i];
  Field v = switching_potential(lin, adj);
  return DerivativeReport{h,    first,        direct, form,
                          theta_dot, std::move(u), std::move(v)};
}

KktReport first_order_kkt_report(const ResourceDistribution& m,
                                 const PopulationState& state,
                                 const AdjointState& adj, double tol_active) {
  const Field& mf = m.field();
  const Field& sw = adj.switching;
  KktReport rep;
  std::vector<double> inactive;
  double min_on_one = std::numeric_limits<double>::infinity();
  double max_on_zero = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mf.size(); ++i) {
    if (mf[i] > tol_active && mf[i] < 1.0 - tol_active)
      inactive.push_back(sw[i]);
    else if (mf[i] >= 1.0 - tol_active)
      min_on_one = std::min(min_on_one, sw[i]);
    else
      max_on_zero = std::max(max_on_zero, sw[i]);
  }
  rep.inactive_count = inactive.size();
  if (!inactive.empty()) {
    std::nth_element(inactive.begin(),
                     inactive.begin() + inactive.size() / 2, inactive.end());
    rep.c_estimate = inactive[inactive.size() / 2];
    for (double v : inactive)
      rep.max_deviation_inactive =
          std::max(rep.max_deviation_inactive, std::fabs(v - rep.c_estimate));
  } else {
    // Bang-bang candidate: c bracketed by the two level sets.
    const double lo = std::isfinite(max_on_zero) ? max_on_zero : min_on_one;
    const double hi = std::isfinite(min_on_one) ? min_on_one : max_on_zero;
    rep.c_estimate = 0.5 * (lo + hi);
  }
  const double tol_sign = 1e-4 * max_abs(sw);
  double viol = 0.0;
  if (std::isfinite(min_on_one))
    viol = std::max(viol, rep.c_estimate - tol_sign - min_on_one);
  if (std::isfinite(max_on_zero))
    viol = std::max(viol, max_on_zero - rep.c_estimate - tol_sign);
  rep.sign_violation = std::max(viol, 0.0);
  rep.sign_consistent = rep.sign_violation <= 0.0;
  return rep;
}

}  // namespace poplab
