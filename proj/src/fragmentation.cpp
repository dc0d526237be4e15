#include "poplab/fragmentation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "poplab/calculus.hpp"

namespace poplab {

namespace {

void validate_intervals(const IntervalList& iv) {
  if (iv.empty()) throw std::invalid_argument("interval list must be nonempty");
  double prev_end = -1.0;
  for (const auto& [a, b] : iv) {
    if (!(a >= 0.0 && b <= 1.0 && a < b))
      throw std::invalid_argument("intervals must satisfy 0 <= a < b <= 1");
    if (a < prev_end)
      throw std::invalid_argument("intervals must be sorted and disjoint");
    prev_end = b;
  }
}

}  // namespace

int interior_perimeter(const IntervalList& intervals) {
  int per = 0;
  for (const auto& [a, b] : intervals) {
    if (a > 0.0) ++per;
    if (b < 1.0) ++per;
  }
  return per;
}

Field signed_distance_1d(const Grid& g, const IntervalList& intervals) {
  if (g.dim() != 1) throw std::invalid_argument("signed distance is 1D only");
  validate_intervals(intervals);
  std::vector<double> bnd;
  for (const auto& [a, b] : intervals) {
    if (a > 0.0) bnd.push_back(a);
    if (b < 1.0) bnd.push_back(b);
  }
  if (bnd.empty())
    throw std::invalid_argument("set has no interior boundary in (0,1)");
  Field h(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double x = g.x(i);
    double d = std::numeric_limits<double>::infinity();
    for (double c : bnd) d = std::min(d, std::abs(x - c));
    bool inside = false;
    for (const auto& [a, b] : intervals)
      if (x >= a && x <= b) { inside = true; break; }
    h[i] = inside ? -d : d;
  }
  return h;
}

Field indicator_1d(const Grid& g, const IntervalList& intervals) {
  Field h = signed_distance_1d(g, intervals);
  Field m(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    m[i] = h[i] <= 0.0 ? 1.0 : 0.0;
  return m;
}

ModicaProfile modica_test_function(const Grid& g, const IntervalList& intervals,
                                   double eta) {
  if (!(eta > 0.0 && eta < 0.5))
    throw std::invalid_argument("eta must lie in (0, 0.5)");
  Field h = signed_distance_1d(g, intervals);
  Field u(g), m(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double t = h[i];
    u[i] = t <= 0.0 ? 1.0 : (t >= eta ? 0.0 : 1.0 - t / eta);
    m[i] = t <= 0.0 ? 1.0 : 0.0;
  }
  ModicaProfile prof{intervals, eta, u, h, 0.0, 0.0,
                     double(interior_perimeter(intervals))};
  prof.gradient_term = dirichlet_energy(u);
  double pot = 0.0;
  const auto& w = g.weights();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double psi = u[i] * u[i] * u[i] / 3.0 - 0.5 * m[i] * u[i] * u[i] +
                 m[i] * m[i] * m[i] / 6.0;
    pot += w[i] * psi;
  }
  prof.potential_term = pot;
  // explicit constants from the ramp construction; the discrete ramp is
  // 1/eta-Lipschitz so both hold once eta is resolved (h <= eta/2)
  if (g.spacing() <= 0.5 * eta) {
    if (prof.gradient_term > 2.0 * prof.interior_per / eta * (1.0 + 1e-12))
      throw std::logic_error("Modica gradient bound violated");
    if (prof.potential_term > 2.0 * eta * prof.interior_per * (1.0 + 1e-12))
      throw std::logic_error("Modica potential bound violated");
  }
  return prof;
}

ModicaBoundReport modica_energy_bound_check(const Grid& g,
                                            const IntervalList& intervals,
                                            double mu, double eta_override) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  ModicaBoundReport rep;
  rep.mu = mu;
  rep.eta = eta_override > 0.0 ? eta_override : std::sqrt(mu);
  rep.under_resolved = g.spacing() > 0.1 * rep.eta;

  Field mf = indicator_1d(g, intervals);
  ResourceDistribution m(mf, integrate(mf));
  PopulationState st = solve_state(g, m, mu);
  rep.shifted_energy_state = st.shifted_energy;

  ModicaProfile prof = modica_test_function(g, intervals, rep.eta);
  rep.shifted_energy_profile =
      0.5 * mu * prof.gradient_term + prof.potential_term;

  double per = prof.interior_per;
  rep.c1_measured =
      per > 0.0 ? rep.shifted_energy_state / (std::sqrt(mu) * per) : 0.0;

  if (!rep.under_resolved &&
      rep.shifted_energy_state >
          rep.shifted_energy_profile + 1e-10 * (1.0 + rep.shifted_energy_profile))
    throw std::logic_error("state energy exceeds Modica profile energy");
  return rep;
}

L1BoundReport l1_energy_bound_check(const Grid& g,
                                    const ResourceDistribution& m, double mu) {
  if (!m.is_bang_bang())
    throw std::invalid_argument("l1 bound requires bang-bang m");
  PopulationState st = solve_state(g, m, mu);
  const Field& th = st.theta;
  const Field& mf = m.field();
  const auto& w = g.weights();
  L1BoundReport rep;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double d = th[i] - mf[i];
    rep.step1_lhs += w[i] * (th[i] / 3.0 + mf[i] / 6.0) * d * d;
    rep.l1_error += w[i] * std::abs(d);
  }
  rep.step1_rhs = st.shifted_energy;
  rep.margin = rep.step1_rhs - rep.step1_lhs;
  rep.m0_measured =
      rep.step1_lhs > 0.0 ? rep.l1_error / std::cbrt(rep.step1_lhs) : 0.0;
  return rep;
}

MollifierReport mollifier_contraction_check(const Grid& g, const Field& m,
                                      const std::vector<double>& eps_list) {
  MollifierReport rep;
  double tv = tv_norm(m);
  const auto& w = g.weights();
  for (double eps : eps_list) {
    Field me = mollify(m, eps);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      l1 += w[i] * std::abs(m[i] - me[i]);
    double ratio = tv > 0.0 ? l1 / (eps * tv) : 0.0;
    rep.eps.push_back(eps);
    rep.ratio.push_back(ratio);
    rep.d0 = std::max(rep.d0, ratio);
  }
  return rep;
}

int grid_n_for_mu(double mu) {
  double target = 0.1 * std::sqrt(mu);
  int n = 65;
  while (1.0 / double(n - 1) > target && n < (1 << 20)) n = 2 * (n - 1) + 1;
  return n;
}

namespace {

int thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("LOGFRAG_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && (unsigned long)v < hw) hw = unsigned(v);
  }
  return int(hw);
}

}  // namespace

SweepResult mu_sweep(const std::vector<double>& mu_list, double m0, int dim,
                     const OptimizerConfig& cfg) {
  if (mu_list.empty()) throw std::invalid_argument("empty mu list");
  if (dim != 1 && dim != 2) throw std::invalid_argument("unsupported dimension");

  SweepResult res;
  res.records.resize(mu_list.size());
  std::vector<std::string> fail(mu_list.size());

  auto run_point = [&](std::size_t k) {
    double mu = mu_list[k];
    SweepRecord& rec = res.records[k];
    rec.mu = mu;
    try {
      int n = grid_n_for_mu(mu);
      if (dim == 2) n = std::min(n, 129);  // 2D resolution cap
      Grid g = build_grid(dim, n);
      rec.grid_n = n;
      rec.under_resolved = g.spacing() > 0.1 * std::sqrt(mu);
      OptimizationResult opt = optimize(g, mu, m0, cfg);
      rec.bv_norm = bv_norm(opt.m_star.field());
      rec.tv_norm = tv_norm(opt.m_star.field());
      rec.objective = opt.final_objective;
      rec.objective_minus_m0 = opt.final_objective - m0;
      rec.bang_bang_fraction = opt.bang_bang_fraction;
    } catch (const std::exception& e) {
      fail[k] = e.what();
    }
  };

  int nthreads = std::min<std::size_t>(thread_cap(), mu_list.size());
  if (nthreads <= 1) {
    for (std::size_t k = 0; k < mu_list.size(); ++k) run_point(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t k = next.fetch_add(1);
          if (k >= mu_list.size()) return;
          run_point(k);
        }
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 0; k < mu_list.size(); ++k)
    if (!fail[k].empty())
      res.failures.push_back("mu=" + std::to_string(mu_list[k]) + ": " + fail[k]);

  // slope over the smallest decade of mu (least squares on log-log)
  std::vector<std::pair<double, double>> pts;  // (log mu, log bv)
  double mu_min = *std::min_element(mu_list.begin(), mu_list.end());
  for (std::size_t k = 0; k < mu_list.size(); ++k) {
    const SweepRecord& r = res.records[k];
    if (!fail[k].empty() || !(r.bv_norm > 0.0)) continue;
    if (r.mu <= 10.0 * mu_min * (1.0 + 1e-9))
      pts.emplace_back(std::log(r.mu), std::log(r.bv_norm));
  }
  if (pts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) { sx += x; sy += y; sxx += x * x; sxy += x * y; }
    double n = double(pts.size());
    double denom = n * sxx - sx * sx;
    if (denom > 0.0) res.slope = (n * sxy - sx * sy) / denom;
  }

  // delta_hat over the three smallest mu
  std::vector<std::size_t> ok;
  for (std::size_t k = 0; k < mu_list.size(); ++k)
    if (fail[k].empty()) ok.push_back(k);
  std::sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    return mu_list[a] < mu_list[b];
  });
  if (!ok.empty()) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < std::min<std::size_t>(3, ok.size()); ++k)
      d = std::min(d, res.records[ok[k]].objective_minus_m0);
    res.delta_hat = d;
  }

  // empirical trend: BV nonincreasing in mu up to 10%
  std::sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    return mu_list[a] > mu_list[b];
  });
  for (std::size_t k = 1; k < ok.size(); ++k)
    if (res.records[ok[k]].bv_norm < res.records[ok[k - 1]].bv_norm * 0.9)
      res.bv_monotone_trend = false;

  return res;
}

}  // namespace poplab
