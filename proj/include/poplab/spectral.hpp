#pragma once
// Eigen-analysis of L = -mu*Lap - q in the quadrature inner product, and the
// two constructive non-optimality certificates (high-mode kernel projection
// and the oscillatory two-bump diagnostic).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poplab/sensitivity.hpp"

namespace poplab {

struct SpectralDecomposition {
  std::vector<double> eigenvalues;   // ascending
  std::vector<Field> eigenfunctions; // L2(quadrature)-normalized
  std::string operator_tag;
};

struct IterationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InactiveSetTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// K smallest eigenpairs of -mu*Lap - diag(q). Dense symmetric solve in 1D,
// shift-invert Lanczos with full reorthogonalization in 2D.
SpectralDecomposition eigenpairs_operator(const Grid& g, double mu,
                                          const Field& q, int K,
                                          const std::string& tag = {});

// Spectrum of L_m = -mu*Lap - (m - 2*theta) at a solved state.
SpectralDecomposition eigenpairs(const LinearizedState& lin, int K);

// Principal eigenvalue of -mu*Lap - (m - theta); zero at a solved state.
double principal_eigenvalue_state_operator(const LinearizedState& lin);

// Direction h supported on the inactive set with int h = 0 and
// int theta*psi_k*h = 0 for k <= K, normalized so int |h*theta|^2 = 1 there.
Field high_mode_perturbation(const LinearizedState& lin,
                             const SpectralDecomposition& spec, int K,
                             const Field& inactive_mask,
                             std::uint64_t seed = 12345);

struct BangBangCertificate {
  bool applicable = false;  // inactive set large enough to test
  bool certified = false;   // found h with ddF > 0 and realized ascent
  int K_used = 0;
  double second_derivative = 0.0;
  double epsilon = 0.0;
  double delta_F = 0.0;
  double inactive_measure = 0.0;
  std::string message;
  std::optional<Field> direction;
};

BangBangCertificate bang_bang_certificate(const Grid& g,
                                          const ResourceDistribution& m,
                                          double mu, int K_max = 64,
                                          std::uint64_t seed = 12345);

struct OscillatoryPerturbation {
  Field psi;  // two-bump test function chi*cos(k|x-x0|) - chi*cos(k|x-y0|)
  Field h;    // (1/theta) * L_m psi, mean-corrected on its support
};

OscillatoryPerturbation oscillatory_perturbation(
    const LinearizedState& lin, std::array<double, 2> x0,
    std::array<double, 2> y0, double r, int k);

}  // namespace poplab
