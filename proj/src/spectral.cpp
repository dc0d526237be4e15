#include "poplab/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "poplab/calculus.hpp"

namespace poplab {

namespace {

// Similarity transform C = W^{1/2} (-mu*Lap - diag(q)) W^{-1/2}; C is
// symmetric in the plain l2 inner product and isospectral to the operator.
Eigen::SparseMatrix<double> symmetrized_matrix(const Grid& g, double mu,
                                               const Field& q,
                                               Eigen::VectorXd& sqrt_w) {
  const std::size_t N = g.node_count();
  sqrt_w.resize(N);
  for (std::size_t i = 0; i < N; ++i)
    sqrt_w[static_cast<int>(i)] = std::sqrt(g.weight(i));
  Eigen::SparseMatrix<double> L = laplacian_matrix(g);
  Eigen::VectorXd d = sqrt_w;
  Eigen::VectorXd dinv = sqrt_w.cwiseInverse();
  Eigen::SparseMatrix<double> C = d.asDiagonal() * L;
  C = C * dinv.asDiagonal();
  C *= -mu;
  for (std::size_t i = 0; i < N; ++i) {
    const int k = static_cast<int>(i);
    C.coeffRef(k, k) -= q[i];
  }
  C.makeCompressed();
  return C;
}

void fix_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i]) > 1e-8) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

SpectralDecomposition from_eigvecs(const Grid& g,
                                   const std::vector<double>& vals,
                                   const std::vector<Eigen::VectorXd>& vecs,
                                   const Eigen::VectorXd& sqrt_w,
                                   std::string tag) {
  SpectralDecomposition out;
  out.eigenvalues = vals;
  out.operator_tag = std::move(tag);
  const std::size_t N = g.node_count();
  for (const auto& v : vecs) {
    Field psi(g);
    for (std::size_t i = 0; i < N; ++i)
      psi[i] = v[static_cast<int>(i)] / sqrt_w[static_cast<int>(i)];
    out.eigenfunctions.push_back(std::move(psi));
  }
  return out;
}

SpectralDecomposition dense_eigenpairs(const Grid& g, double mu,
                                       const Field& q, int K,
                                       const std::string& tag) {
  Eigen::VectorXd sqrt_w;
  Eigen::SparseMatrix<double> Cs = symmetrized_matrix(g, mu, q, sqrt_w);
  Eigen::MatrixXd C = Eigen::MatrixXd(Cs);
  C = 0.5 * (C + C.transpose());  // scrub asymmetric round-off
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw IterationFailure("dense eigensolver failed");
  std::vector<double> vals(K);
  std::vector<Eigen::VectorXd> vecs(K);
  for (int k = 0; k < K; ++k) {
    vals[k] = es.eigenvalues()[k];
    vecs[k] = es.eigenvectors().col(k);
    fix_sign(vecs[k]);
  }
  return from_eigvecs(g, vals, vecs, sqrt_w, tag);
}

SpectralDecomposition lanczos_eigenpairs(const Grid& g, double mu,
                                         const Field& q, int K,
                                         const std::string& tag) {
  Eigen::VectorXd sqrt_w;
  Eigen::SparseMatrix<double> C = symmetrized_matrix(g, mu, q, sqrt_w);
  const int N = static_cast<int>(g.node_count());

  // Shift below the spectrum (Gershgorin) so C - sigma*I is SPD.
  double lo = std::numeric_limits<double>::infinity();
  for (int col = 0; col < C.outerSize(); ++col) {
    double diag = 0.0, off = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(C, col); it; ++it) {
      if (it.row() == col)
        diag = it.value();
      else
        off += std::fabs(it.value());
    }
    lo = std::min(lo, diag - off);
  }
  const double sigma = lo - 1.0;
  Eigen::SparseMatrix<double> A = C;
  for (int i = 0; i < N; ++i) A.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success)
    throw IterationFailure("shift-invert factorization failed");

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int steps = std::min(N, 4 * K + 40); steps <= N;
       steps = std::min(N, 2 * steps)) {
    std::vector<Eigen::VectorXd> V;
    std::vector<double> alpha, beta;
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i) v[i] = gauss(rng);
    v.normalize();
    V.push_back(v);
    Eigen::VectorXd w;
    for (int jstep = 0; jstep < steps; ++jstep) {
      w = solver.solve(V.back());
      const double a = V.back().dot(w);
      alpha.push_back(a);
      w -= a * V.back();
      if (V.size() >= 2) w -= beta.back() * V[V.size() - 2];
      for (const auto& u : V) w -= u.dot(w) * u;  // full reorthogonalization
      const double b = w.norm();
      if (b < 1e-14) break;
      beta.push_back(b);
      V.push_back(w / b);
    }
    const int msz = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(msz, msz);
    for (int i = 0; i < msz; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < msz) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // Largest Ritz values of (C - sigma I)^{-1} map to smallest of C.
    std::vector<double> vals;
    std::vector<Eigen::VectorXd> vecs;
    bool ok = true;
    for (int k = 0; k < K && k < msz; ++k) {
      const int idx = msz - 1 - k;
      const double nu = es.eigenvalues()[idx];
      if (nu <= 0.0) {
        ok = false;
        break;
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
      for (int i = 0; i < msz && i < static_cast<int>(V.size()); ++i)
        x += es.eigenvectors()(i, idx) * V[i];
      x.normalize();
      const double lam = sigma + 1.0 / nu;
      if ((C * x - lam * x).norm() > 1e-8) {
        ok = false;
        break;
      }
      vals.push_back(lam);
      vecs.push_back(x);
    }
    if (ok && static_cast<int>(vals.size()) == K) {
      // ascending order
      std::vector<int> ord(K);
      for (int k = 0; k < K; ++k) ord[k] = k;
      std::sort(ord.begin(), ord.end(),
                [&](int a, int b) { return vals[a] < vals[b]; });
      std::vector<double> svals(K);
      std::vector<Eigen::VectorXd> svecs(K);
      for (int k = 0; k < K; ++k) {
        svals[k] = vals[ord[k]];
        svecs[k] = vecs[ord[k]];
        fix_sign(svecs[k]);
      }
      return from_eigvecs(g, svals, svecs, sqrt_w, tag);
    }
    if (steps == N) break;
  }
  throw IterationFailure("Lanczos failed to reach the residual target");
}

}  // namespace

SpectralDecomposition eigenpairs_operator(const Grid& g, double mu,
                                          const Field& q, int K,
                                          const std::string& tag) {
  if (K < 1 || static_cast<std::size_t>(K) > g.node_count() / 4)
    throw std::invalid_argument("eigenpairs: require 1 <= K <= node_count/4");
  if (g.dim() == 1) return dense_eigenpairs(g, mu, q, K, tag);
  return lanczos_eigenpairs(g, mu, q, K, tag);
}

SpectralDecomposition eigenpairs(const LinearizedState& lin, int K) {
  const PopulationState& st = lin.state();
  Field q = lin.resources().field();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] -= 2.0 * st.theta[i];
  return eigenpairs_operator(lin.grid(), st.mu, q, K,
                             "L_m at mu=" + std::to_string(st.mu));
}

double principal_eigenvalue_state_operator(const LinearizedState& lin) {
  const PopulationState& st = lin.state();
  Field q = lin.resources().field();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] -= st.theta[i];
  return eigenpairs_operator(lin.grid(), st.mu, q, 1, "-mu Lap - (m-theta)")
      .eigenvalues[0];
}

Field high_mode_perturbation(const LinearizedState& lin,
                             const SpectralDecomposition& spec, int K,
                             const Field& inactive_mask, std::uint64_t seed) {
  const Grid& g = lin.grid();
  const Field& theta = lin.state().theta;
  const auto& w = g.weights();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < inactive_mask.size(); ++i)
    if (inactive_mask[i] > 0.5) idx.push_back(i);
  if (static_cast<int>(idx.size()) <= K + 1)
    throw InactiveSetTooSmall("inactive set smaller than constraint count");
  if (static_cast<int>(spec.eigenfunctions.size()) < K)
    throw std::invalid_argument("decomposition carries fewer than K modes");

  const std::size_t ni = idx.size();
  // Constraint functionals restricted to the inactive nodes.
  std::vector<std::vector<double>> cons;
  {
    std::vector<double> c0(ni);
    for (std::size_t a = 0; a < ni; ++a) c0[a] = w[idx[a]];
    cons.push_back(std::move(c0));
    for (int k = 0; k < K; ++k) {
      const Field& psi = spec.eigenfunctions[k];
      std::vector<double> ck(ni);
      for (std::size_t a = 0; a < ni; ++a)
        ck[a] = w[idx[a]] * theta[idx[a]] * psi[idx[a]];
      cons.push_back(std::move(ck));
    }
  }
  // Orthonormal basis of the span (modified Gram-Schmidt).
  std::vector<std::vector<double>> basis;
  for (auto& c : cons) {
    for (const auto& b : basis) {
      double d = 0.0;
      for (std::size_t a = 0; a < ni; ++a) d += c[a] * b[a];
      for (std::size_t a = 0; a < ni; ++a) c[a] -= d * b[a];
    }
    double nrm = 0.0;
    for (double v : c) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-13) {
      for (double& v : c) v /= nrm;
      basis.push_back(c);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field h(g);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<double> s(ni);
    for (double& v : s) v = uni(rng);
    for (int pass = 0; pass < 2; ++pass)  // re-project for orthogonality
      for (const auto& b : basis) {
        double d = 0.0;
        for (std::size_t a = 0; a < ni; ++a) d += s[a] * b[a];
        for (std::size_t a = 0; a < ni; ++a) s[a] -= d * b[a];
      }
    double norm2 = 0.0;
    for (std::size_t a = 0; a < ni; ++a)
      norm2 += w[idx[a]] * s[a] * theta[idx[a]] * s[a] * theta[idx[a]];
    if (norm2 < 1e-20) continue;
    const double scale = 1.0 / std::sqrt(norm2);
    for (std::size_t a = 0; a < ni; ++a) h[idx[a]] = s[a] * scale;
    return h;
  }
  throw InactiveSetTooSmall("kernel of the constraint set is degenerate");
}

BangBangCertificate bang_bang_certificate(const Grid& g,
                                          const ResourceDistribution& m,
                                          double mu, int K_max,
                                          std::uint64_t seed) {
  const Field& mf = m.field();
  Field mask(g);
  double measure = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mf.size(); ++i)
    if (mf[i] > 1e-3 && mf[i] < 1.0 - 1e-3) {
      mask[i] = 1.0;
      measure += g.weight(i);
      ++count;
    }
  BangBangCertificate cert;
  cert.inactive_measure = measure;
  if (count < 8 || measure < 1e-6) {
    cert.message = "already bang-bang, test not applicable";
    if (count > 0 && static_cast<int>(count) <= K_max + 1)
      cert.message = "inactive set too small for the constraint system";
    return cert;
  }
  cert.applicable = true;

  PopulationState st = solve_state(g, m, mu);
  LinearizedState lin(g, m, st);
  AdjointState adj = solve_adjoint(lin);

  for (int K : {4, 8, 16, 32, 64}) {
    if (K > K_max) break;
    if (static_cast<std::size_t>(K) + 2 > count) break;
    if (static_cast<std::size_t>(K) > g.node_count() / 4) break;
    SpectralDecomposition spec = eigenpairs(lin, K);
    Field h(g);
    try {
      h = high_mode_perturbation(lin, spec, K, mask, seed);
    } catch (const InactiveSetTooSmall&) {
      break;
    }
    Field theta_dot = gateaux_theta_dot(lin, h);
    const double ddF = second_derivative_energy_form(lin, adj, h, theta_dot);
    if (ddF <= 0.0) continue;

    // Largest step keeping 0 <= m + eps*h <= 1.
    double eps_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mf.size(); ++i) {
      if (h[i] > 0.0) eps_max = std::min(eps_max, (1.0 - mf[i]) / h[i]);
      if (h[i] < 0.0) eps_max = std::min(eps_max, -mf[i] / h[i]);
    }
    if (!std::isfinite(eps_max)) eps_max = 1.0;
    double eps = 0.9 * eps_max;
    for (int bt = 0; bt < 40; ++bt, eps *= 0.5) {
      Field cand = mf;
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand[i] = std::clamp(cand[i] + eps * h[i], 0.0, 1.0);
      ResourceDistribution md(std::move(cand), m.mass());
      PopulationState st2 = solve_state(g, md, mu);
      if (st2.total_population > st.total_population) {
        cert.certified = true;
        cert.K_used = K;
        cert.second_derivative = ddF;
        cert.epsilon = eps;
        cert.delta_F = st2.total_population - st.total_population;
        cert.direction = h;
        cert.message = "ascent direction certified: m is not a local maximizer";
        return cert;
      }
    }
  }
  cert.message = "exhausted K schedule without a certified ascent";
  return cert;
}

OscillatoryPerturbation oscillatory_perturbation(const LinearizedState& lin,
                                                 std::array<double, 2> x0,
                                                 std::array<double, 2> y0,
                                                 double r, int k) {
  const Grid& g = lin.grid();
  const Field& mf = lin.resources().field();
  const Field& theta = lin.state().theta;
  const double mu = lin.state().mu;
  const int dim = g.dim();

  auto dist = [&](std::size_t i, const std::array<double, 2>& c) {
    const double dx = g.x(i) - c[0];
    const double dy = dim == 2 ? g.y(i) - c[1] : 0.0;
    return std::sqrt(dx * dx + dy * dy);
  };
  const double centers =
      std::sqrt((x0[0] - y0[0]) * (x0[0] - y0[0]) +
                (dim == 2 ? (x0[1] - y0[1]) * (x0[1] - y0[1]) : 0.0));
  if (centers <= 2.0 * r)
    throw std::invalid_argument("oscillatory_perturbation: balls overlap");

  auto chi = [&](double s) {
    if (s >= r) return 0.0;
    const double t = s / r;
    return (1.0 - t * t) * (1.0 - t * t);
  };

  Field psi(g);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double dx0 = dist(i, x0);
    const double dy0 = dist(i, y0);
    if (dx0 < r || dy0 < r) {
      if (!(mf[i] > 1e-3 && mf[i] < 1.0 - 1e-3))
        throw std::invalid_argument(
            "oscillatory_perturbation: ball leaves the inactive set");
      support.push_back(i);
    }
    psi[i] = chi(dx0) * std::cos(k * dx0) - chi(dy0) * std::cos(k * dy0);
  }

  Field lap = apply_neumann_laplacian(psi);
  Field h(g);
  double mass = 0.0, support_measure = 0.0;
  for (std::size_t i : support) {
    h[i] = (-mu * lap[i] - (mf[i] - 2.0 * theta[i]) * psi[i]) / theta[i];
    mass += g.weight(i) * h[i];
    support_measure += g.weight(i);
  }
  // Mean-correct on the support so the perturbation conserves mass even when
  // m is not critical.
  const double shift = mass / support_measure;
  for (std::size_t i : support) h[i] -= shift;
  return OscillatoryPerturbation{std::move(psi), std::move(h)};
}

}  // namespace poplab
