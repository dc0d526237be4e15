#include "poplab/kernels.hpp"

#include <cmath>

namespace poplab::kernels {
namespace {

double k_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double k_dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double k_wdot(const double* w, const double* x, const double* y,
              std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

double k_wsum3(const double* w, const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i] * x[i];
  return s;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double k_max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

double k_min(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

void k_lap1d(const double* u, double* out, std::size_t n, double inv_h2) {
  out[0] = 2.0 * (u[1] - u[0]) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
  out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv_h2;
}

void k_lap2d(const double* u, double* out, std::size_t n, double inv_h2) {
  auto at = [&](std::size_t i, std::size_t j) { return u[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    // mirrored ghosts: index -1 -> 1, n -> n-2
    const std::size_t im = (i == 0) ? 1 : i - 1;
    const std::size_t ip = (i == n - 1) ? n - 2 : i + 1;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jm = (j == 0) ? 1 : j - 1;
      const std::size_t jp = (j == n - 1) ? n - 2 : j + 1;
      out[i * n + j] = (at(im, j) + at(ip, j) + at(i, jm) + at(i, jp) -
                        4.0 * at(i, j)) *
                       inv_h2;
    }
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t = {"scalar", k_sum,     k_dot, k_wdot, k_wsum3,
                          k_axpy,   k_max_abs, k_min, k_lap1d, k_lap2d};
  return t;
}

}  // namespace poplab::kernels
