#include "poplab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "poplab/calculus.hpp"
#include "poplab/linops.hpp"

namespace poplab {

ResourceDistribution::ResourceDistribution(Field field, double expected_mass)
    : field_(std::move(field)) {
  mass_ = integrate(field_);
  for (std::size_t i = 0; i < field_.size(); ++i) {
    const double v = field_[i];
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("resource distribution violates 0 <= m <= 1");
  }
  if (mass_ <= 0.0)
    throw std::invalid_argument("resource distribution must not vanish");
  if (std::fabs(mass_ - expected_mass) > 1e-10 * std::max(1.0, expected_mass))
    throw std::invalid_argument("resource mass does not match m0");
}

bool ResourceDistribution::is_bang_bang() const {
  for (std::size_t i = 0; i < field_.size(); ++i) {
    const double v = field_[i];
    if (std::min(std::fabs(v), std::fabs(v - 1.0)) > 1e-9) return false;
  }
  return true;
}

Field state_residual(const Field& theta, const Field& m, double mu) {
  Field r = apply_neumann_laplacian(theta);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = mu * r[i] + theta[i] * (m[i] - theta[i]);
  return r;
}

namespace {

double energy_of(const Field& u, const Field& m, double mu) {
  const auto& w = u.grid().weights();
  double mu2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) mu2 += w[i] * m[i] * u[i] * u[i];
  return 0.5 * mu * dirichlet_energy(u) - 0.5 * mu2 + integral_pow3(u) / 3.0;
}

void fill_energies(const Grid& g, const ResourceDistribution& m, double mu,
                   PopulationState& st) {
  st.total_population = integrate(st.theta);
  st.energy = energy_of(st.theta, m.field(), mu);
  st.shifted_energy = st.energy + integral_pow3(m.field()) / 6.0;
}

}  // namespace

PopulationState solve_state(const Grid& g, const ResourceDistribution& m,
                            double mu, const SolverConfig& cfg) {
  if (mu <= 0.0) throw std::invalid_argument("solve_state: mu must be positive");
  const Field& mf = m.field();
  const std::size_t N = g.node_count();

  // Initial guess away from the unstable trivial branch theta == 0.
  const double floor0 = 0.1 * m.mass();
  Field theta(g);
  for (std::size_t i = 0; i < N; ++i) theta[i] = std::max(mf[i], floor0);

  // the residual scales linearly in mu (divide the equation by mu), so the
  // max-norm target does too once mu exceeds 1
  const double tol_eff = cfg.tol * std::max(1.0, mu);
  auto merit = [](const Field& rr) { return std::sqrt(inner(rr, rr)); };
  Field r = state_residual(theta, mf, mu);
  double rnorm = max_abs(r);
  double rmerit = merit(r);
  int iter = 0;
  bool oracle_used = false;
  const Eigen::SparseMatrix<double> L = laplacian_matrix(g);

  while (rnorm > tol_eff && iter < cfg.max_newton) {
    // Jacobian J = mu*Lap + diag(m - 2 theta); solve J d = -r.
    Eigen::SparseMatrix<double> J = mu * L;
    for (std::size_t i = 0; i < N; ++i) {
      const int k = static_cast<int>(i);
      J.coeffRef(k, k) += mf[i] - 2.0 * theta[i];
    }
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success)
      throw NonConvergence("solve_state: Jacobian factorization failed");
    Eigen::VectorXd rhs(N);
    for (std::size_t i = 0; i < N; ++i) rhs[static_cast<int>(i)] = -r[i];
    Eigen::VectorXd d = lu.solve(rhs);

    double alpha = 1.0;
    Field trial(g);
    for (int ls = 0; ls < cfg.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < N; ++i)
        trial[i] = std::max(theta[i] + alpha * d[static_cast<int>(i)], 1e-12);
      Field rt = state_residual(trial, mf, mu);
      // merit in the (smoother) quadrature l2 norm; convergence is max-norm
      const double rt_merit = merit(rt);
      if (rt_merit < rmerit) {
        theta = trial;
        r = rt;
        rnorm = max_abs(r);
        rmerit = rt_merit;
        break;
      }
      alpha *= 0.5;
      if (ls + 1 == cfg.max_linesearch) {
        if (!cfg.fallback_gradient_flow || oracle_used)
          throw NonConvergence("solve_state: line search stalled");
        // restart Newton from the energy-descent minimizer
        oracle_used = true;
        theta = minimize_energy_oracle(g, m, mu);
        r = state_residual(theta, mf, mu);
        rnorm = max_abs(r);
        rmerit = merit(r);
      }
    }
    ++iter;
  }
  if (rnorm > tol_eff) throw NonConvergence("solve_state: iteration cap hit");
  if (min_value(theta) <= 0.0)
    throw NonConvergence("solve_state: positivity lost");

  PopulationState st{std::move(theta), mu, 0, 0, 0, iter, rnorm};
  fill_energies(g, m, mu, st);
  // passive invariants: discrete max principle and the 1D efficiency bound
  if (max_abs(st.theta) > 1.0 + 1e-8)
    throw NonConvergence("solve_state: max principle violated");
  if (g.dim() == 1 && st.total_population > 3.0 * m.mass() + 1e-9)
    throw NonConvergence("solve_state: 1D efficiency bound violated");
  return st;
}

Field minimize_energy_oracle(const Grid& g, const ResourceDistribution& m,
                             double mu) {
  const Field& mf = m.field();
  const std::size_t N = g.node_count();
  const double floor0 = 0.1 * m.mass();
  Field u(g);
  for (std::size_t i = 0; i < N; ++i) u[i] = std::max(mf[i], floor0);

  // Energy gradient in the quadrature inner product is minus the residual.
  auto grad = [&](const Field& v) {
    Field gvec = state_residual(v, mf, mu);
    for (std::size_t i = 0; i < N; ++i) gvec[i] = -gvec[i];
    return gvec;
  };
  auto project = [&](Field& v) {
    for (std::size_t i = 0; i < N; ++i) v[i] = std::max(v[i], 0.0);
  };

  const double h2 = g.spacing() * g.spacing();
  double tau = 0.25 * h2 / std::max(mu, 1e-8);  // safe explicit step
  double e = energy_of(u, mf, mu);
  Field gv = grad(u);
  Field u_prev = u, g_prev = gv;
  const int max_iter = 500000;
  for (int it = 0; it < max_iter; ++it) {
    Field trial = u;
    for (std::size_t i = 0; i < N; ++i) trial[i] -= tau * gv[i];
    project(trial);
    double et = energy_of(trial, mf, mu);
    int back = 0;
    while (et > e + 1e-14 * std::fabs(e) && back < 60) {
      tau *= 0.5;
      trial = u;
      for (std::size_t i = 0; i < N; ++i) trial[i] -= tau * gv[i];
      project(trial);
      et = energy_of(trial, mf, mu);
      ++back;
    }
    u_prev = u;
    g_prev = gv;
    u = trial;
    e = et;
    gv = grad(u);

    // Stationarity of the projected gradient: at a node pinned to the
    // u >= 0 bound an outward-pushing gradient is admissible.
    double stat = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double gi = (u[i] <= 0.0) ? std::min(gv[i], 0.0) : gv[i];
      stat = std::max(stat, std::fabs(gi));
    }
    if (stat < 1e-11) break;

    // Barzilai-Borwein step for the next iteration.
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double s = u[i] - u_prev[i];
      const double y = gv[i] - g_prev[i];
      sy += s * y;
      ss += s * s;
    }
    if (sy > 1e-300 && ss > 0.0)
      tau = std::clamp(ss / sy, 1e-6 * h2, 1e6);
    else
      tau = 0.25 * h2 / std::max(mu, 1e-8);
  }
  u.check_finite("minimize_energy_oracle");
  return u;
}

double energy(const Grid& g, const ResourceDistribution& m, double mu,
              const Field& u) {
  if (min_value(u) < 0.0)
    throw std::invalid_argument("energy: u must be nonnegative");
  return energy_of(u, m.field(), mu);
}

double shifted_energy(const Grid& g, const ResourceDistribution& m, double mu,
                      const Field& u) {
  return energy(g, m, mu, u) + integral_pow3(m.field()) / 6.0;
}

Criterion identity_criterion() {
  return Criterion{[](double t) { return t; }, [](double) { return 1.0; },
                   [](double) { return 0.0; }};
}

double criterion_j(const PopulationState& state, const Criterion& j) {
  const Field& th = state.theta;
  Field jvals(th.grid());
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (j.jp(th[i]) <= 0.0)
      throw std::invalid_argument("criterion_j: j' <= 0 on the theta range");
    jvals[i] = j.j(th[i]);
  }
  return integrate(jvals);
}

}  // namespace poplab
