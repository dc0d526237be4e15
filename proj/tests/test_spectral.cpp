#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poplab/calculus.hpp"
#include "poplab/spectral.hpp"

using namespace poplab;

TEST_CASE("constant-m eigenvalues match the closed form (1D)") {
  Grid g = build_grid(1, 513);
  const double mu = 0.02, m0 = 0.4;
  // L_m at theta == m0 has q = m - 2 theta = -m0
  SpectralDecomposition spec =
      eigenpairs_operator(g, mu, Field(g, -m0), 10, "constant");
  REQUIRE(spec.eigenvalues.size() == 10);
  for (int k = 1; k <= 10; ++k) {
    double exact = mu * M_PI * M_PI * double(k - 1) * double(k - 1) + m0;
    double rel = std::fabs(spec.eigenvalues[k - 1] - exact) / exact;
    if (k <= 5) CHECK(rel < 0.005);
  }
  // eigenvalues ascend
  for (std::size_t k = 1; k < spec.eigenvalues.size(); ++k)
    CHECK(spec.eigenvalues[k] >= spec.eigenvalues[k - 1]);
}

TEST_CASE("constant-m eigenvalues match the closed form (2D Lanczos)") {
  Grid g = build_grid(2, 65);
  const double mu = 0.05, m0 = 0.4;
  SpectralDecomposition spec =
      eigenpairs_operator(g, mu, Field(g, -m0), 6, "constant2d");
  // continuum eigenvalues mu*pi^2*(i^2+j^2) + m0, sorted
  std::vector<double> exact;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j)
      exact.push_back(mu * M_PI * M_PI * double(i * i + j * j) + m0);
  std::sort(exact.begin(), exact.end());
  for (int k = 0; k < 6; ++k)
    CHECK(std::fabs(spec.eigenvalues[k] - exact[k]) / exact[k] < 0.005);
}

TEST_CASE("eigenfunctions are orthonormal with small residual") {
  Grid g = build_grid(1, 257);
  ResourceDistribution m(Field(g, 0.5), 0.5);
  PopulationState st = solve_state(g, m, 0.05);
  LinearizedState lin(g, m, st);
  SpectralDecomposition spec = eigenpairs(lin, 6);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      double ip = inner(spec.eigenfunctions[a], spec.eigenfunctions[b]);
      CHECK(std::fabs(ip - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
    // operator residual: -mu*lap(psi) - q*psi - lambda*psi
    const Field& psi = spec.eigenfunctions[a];
    Field lap = apply_neumann_laplacian(psi);
    double res = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double q = m.field()[i] - 2.0 * st.theta[i];
      res = std::max(res, std::fabs(-0.05 * lap[i] - q * psi[i] -
                                    spec.eigenvalues[a] * psi[i]));
    }
    CHECK(res < 1e-6);
  }
}

TEST_CASE("positivity: lambda_1(L_m) > 0 and state operator is critical") {
  for (int dim : {1, 2}) {
    Grid g = build_grid(dim, dim == 1 ? 257 : 33);
    ResourceDistribution m(Field(g, 0.4), 0.4);
    PopulationState st = solve_state(g, m, 0.05);
    LinearizedState lin(g, m, st);
    SpectralDecomposition spec = eigenpairs(lin, 1);
    CHECK(spec.eigenvalues[0] > 0.0);
    CHECK(std::fabs(principal_eigenvalue_state_operator(lin)) < 1e-6);
  }
}

TEST_CASE("high-mode perturbation satisfies the constraints") {
  Grid g = build_grid(1, 257);
  const double m0 = 0.4, mu = 0.1;
  ResourceDistribution m(Field(g, m0), m0);
  PopulationState st = solve_state(g, m, mu);
  LinearizedState lin(g, m, st);
  const int K = 8;
  SpectralDecomposition spec = eigenpairs(lin, K);
  Field mask(g, 1.0);  // everything inactive for the constant control
  Field h = high_mode_perturbation(lin, spec, K, mask, 2024);
  CHECK(std::fabs(integrate(h)) < 1e-10);
  for (int k = 0; k < K; ++k) {
    Field integrand(g);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      integrand[i] = st.theta[i] * spec.eigenfunctions[k][i] * h[i];
    CHECK(std::fabs(integrate(integrand)) < 1e-10);
  }
  Field ht2(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    ht2[i] = h[i] * st.theta[i] * h[i] * st.theta[i];
  CHECK(integrate(ht2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bang-bang certificate at the constant critical point") {
  Grid g = build_grid(1, 257);
  ResourceDistribution m(Field(g, 0.4), 0.4);
  BangBangCertificate cert = bang_bang_certificate(g, m, 0.1);
  CHECK(cert.applicable);
  CHECK(cert.certified);
  CHECK(cert.second_derivative > 0.0);
  CHECK(cert.delta_F > 0.0);
  CHECK(cert.epsilon > 0.0);
  REQUIRE(cert.direction.has_value());
  // the perturbed control stays admissible
  Field mp(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    mp[i] = m.field()[i] + cert.epsilon * (*cert.direction)[i];
  CHECK(min_value(mp) >= -1e-12);
  CHECK(max_abs(mp) <= 1.0 + 1e-12);
}

TEST_CASE("certificate declares bang-bang inputs not applicable") {
  Grid g = build_grid(1, 129);
  Field mf(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    mf[i] = g.x(i) <= 0.4 ? 1.0 : 0.0;
  ResourceDistribution m(mf, integrate(mf));
  BangBangCertificate cert = bang_bang_certificate(g, m, 0.1);
  CHECK_FALSE(cert.applicable);
}

TEST_CASE("oscillatory test functions scale like k^2") {
  Grid g = build_grid(1, 1025);
  ResourceDistribution m(Field(g, 0.4), 0.4);
  PopulationState st = solve_state(g, m, 0.05);
  LinearizedState lin(g, m, st);
  double prev = 0.0;
  std::vector<double> energies;
  for (int k : {20, 40, 80}) {
    OscillatoryPerturbation osc = oscillatory_perturbation(
        lin, {0.25, 0.0}, {0.75, 0.0}, 0.24, k);
    energies.push_back(dirichlet_energy(osc.psi));
    // h is mean-free against theta on its support by construction
    Field integrand(g);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      integrand[i] = osc.h[i] * st.theta[i];
    CHECK(std::fabs(integrate(integrand)) < 1e-8);
    (void)prev;
  }
  CHECK(energies[1] / energies[0] > 3.5);
  CHECK(energies[1] / energies[0] < 4.5);
  CHECK(energies[2] / energies[1] > 3.5);
  CHECK(energies[2] / energies[1] < 4.5);
}
