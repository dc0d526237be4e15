#include "poplab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include "poplab/calculus.hpp"

namespace poplab {

namespace {

double clip01(double t) { return std::min(1.0, std::max(0.0, t)); }

double mass_at_shift(const Grid& g, const std::vector<double>& v, double l) {
  double s = 0.0;
  const auto& w = g.weights();
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * clip01(v[i] - l);
  return s;
}

}  // namespace

ResourceDistribution project_onto_constraints(const Grid& g, const Field& v,
                                              double m0) {
  if (!(m0 > 0.0 && m0 < 1.0))
    throw std::invalid_argument("m0 must lie in (0,1)");
  const auto& vv = v.values();
  double lo = *std::min_element(vv.begin(), vv.end()) - 1.0;  // mass -> 1
  double hi = *std::max_element(vv.begin(), vv.end());        // mass -> 0
  // mass_at_shift is continuous and nonincreasing in l; bisect.
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double mm = mass_at_shift(g, vv, mid);
    if (std::abs(mm - m0) <= 1e-13) {
      lo = hi = mid;
      break;
    }
    if (mm > m0) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-16 * (1.0 + std::abs(hi))) break;
  }
  double l = 0.5 * (lo + hi);
  std::vector<double> m(vv.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = clip01(vv[i] - l);
  return ResourceDistribution(Field(g, std::move(m)), m0);
}

namespace {

// Bathtub: fill the superlevel sets of s with total mass m0. Ties broken by
// coordinate order so the result is deterministic.
std::vector<double> bathtub_fill(const Grid& g, const std::vector<double>& s,
                                 double m0) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  const auto& w = g.weights();
  std::vector<double> m(s.size(), 0.0);
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::size_t i = order[k];
    if (cum + w[i] <= m0) {
      m[i] = 1.0;
      cum += w[i];
    } else {
      m[i] = (m0 - cum) / w[i];
      break;
    }
  }
  return m;
}

struct Evaluated {
  PopulationState state;
  double objective;
};

Evaluated evaluate(const Grid& g, const ResourceDistribution& m, double mu,
                   const Criterion* j, const SolverConfig& scfg) {
  Evaluated ev{solve_state(g, m, mu, scfg), 0.0};
  ev.objective = j ? criterion_j(ev.state, *j) : ev.state.total_population;
  return ev;
}

AdjointState adjoint_of(const Grid& g, const ResourceDistribution& m,
                        const PopulationState& st, const Criterion* j) {
  LinearizedState lin(g, m, st);
  return j ? solve_adjoint(lin, CriterionTag::general_j, j)
           : solve_adjoint(lin);
}

OptimizationResult run_optimize(const Grid& g, double mu, double m0,
                                const Criterion* j,
                                const OptimizerConfig& cfg) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(m0 > 0.0 && m0 < 1.0))
    throw std::invalid_argument("m0 must lie in (0,1)");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::optional<OptimizationResult> best;

  for (int r = 0; r < std::max(1, cfg.n_restarts); ++r) {
    ResourceDistribution m = [&]() {
      if (r == 0) return ResourceDistribution(Field(g, m0), m0);
      std::vector<double> v(g.node_count());
      for (auto& x : v) x = unif(rng);
      return project_onto_constraints(g, Field(g, std::move(v)), m0);
    }();

    Evaluated cur = evaluate(g, m, mu, j, cfg.solver);
    std::vector<double> trace{cur.objective};

    for (int it = 0; it < cfg.max_iters; ++it) {
      Field dir = adjoint_of(g, m, cur.state, j).switching;
      double dmax = max_abs(dir);
      if (dmax <= 0.0) break;
      double tau = 1.0 / dmax;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        std::vector<double> v(g.node_count());
        for (std::size_t i = 0; i < v.size(); ++i)
          v[i] = m.field()[i] + tau * dir[i];
        ResourceDistribution cand =
            project_onto_constraints(g, Field(g, std::move(v)), m0);
        // predicted ascent along the feasible step
        double pred = 0.0;
        const auto& w = g.weights();
        for (std::size_t i = 0; i < w.size(); ++i)
          pred += w[i] * dir[i] * (cand.field()[i] - m.field()[i]);
        if (pred <= 1e-15 * (1.0 + std::abs(cur.objective))) break;
        Evaluated trial = evaluate(g, cand, mu, j, cfg.solver);
        if (trial.objective >= cur.objective + 1e-4 * pred) {
          m = std::move(cand);
          cur = std::move(trial);
          trace.push_back(cur.objective);
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      if (!accepted) break;
      if (trace.size() >= 2 &&
          trace.back() - trace[trace.size() - 2] <
              cfg.objective_tol * (1.0 + std::abs(trace.back())))
        break;
    }

    if (!j) {
      ResourceDistribution polished =
          threshold_fixed_point(g, m, mu, m0, cfg.threshold_max_iter);
      Evaluated pev = evaluate(g, polished, mu, nullptr, cfg.solver);
      if (pev.objective >=
          cur.objective - 1e-12 * (1.0 + std::abs(cur.objective))) {
        m = std::move(polished);
        cur = std::move(pev);
        trace.push_back(cur.objective);
      }
    }

    if (!best || cur.objective > best->final_objective) {
      AdjointState adj = adjoint_of(g, m, cur.state, j);
      KktReport kkt = first_order_kkt_report(m, cur.state, adj);
      double inactive = 0.0;
      const auto& w = g.weights();
      for (std::size_t i = 0; i < w.size(); ++i)
        if (m.field()[i] > 1e-3 && m.field()[i] < 1.0 - 1e-3) inactive += w[i];
      best = OptimizationResult{std::move(m),
                                std::move(trace),
                                cur.objective,
                                inactive,
                                kkt.max_deviation_inactive,
                                kkt.sign_consistent,
                                0,
                                mu,
                                m0};
    }
  }

  best->restarts_used = std::max(1, cfg.n_restarts);
  return std::move(*best);
}

}  // namespace

OptimizationResult optimize(const Grid& g, double mu, double m0,
                            const OptimizerConfig& cfg) {
  return run_optimize(g, mu, m0, nullptr, cfg);
}

OptimizationResult optimize_general_j(const Grid& g, double mu, double m0,
                                      const Criterion& j,
                                      const OptimizerConfig& cfg) {
  // the ascent direction theta*p_j is only a gradient when j is increasing
  for (int k = 0; k <= 64; ++k) {
    double t = 1e-6 + (1.0 - 1e-6) * (double(k) / 64.0);
    if (!(j.jp(t) > 0.0))
      throw std::invalid_argument(
          "criterion must be strictly increasing on (0,1]");
  }
  return run_optimize(g, mu, m0, &j, cfg);
}

ResourceDistribution threshold_fixed_point(const Grid& g,
                                           const ResourceDistribution& m_init,
                                           double mu, double m0,
                                           int max_iter) {
  SolverConfig scfg;
  ResourceDistribution m = m_init;
  std::vector<double> prev, prev2;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::vector<double> best = m.field().values();
  for (int it = 0; it < max_iter; ++it) {
    PopulationState st = solve_state(g, m, mu, scfg);
    if (st.total_population > best_obj) {
      best_obj = st.total_population;
      best = m.field().values();
    }
    LinearizedState lin(g, m, st);
    AdjointState adj = solve_adjoint(lin);
    std::vector<double> next = bathtub_fill(g, adj.switching.values(), m0);
    if (next == m.field().values()) return m;    // fixed point
    if (!prev2.empty() && next == prev2) break;  // period-2 cycle
    prev2 = std::move(prev);
    prev = m.field().values();
    m = ResourceDistribution(Field(g, std::move(next)), m0);
  }
  PopulationState st = solve_state(g, m, mu, scfg);
  if (st.total_population > best_obj) best = m.field().values();
  return ResourceDistribution(Field(g, std::move(best)), m0);
}

}  // namespace poplab
