#pragma once
// Data-parallel inner loops used by the field calculus. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant. The
// active table is selected once at startup; POPLAB_FORCE_SCALAR=1 pins the
// reference path.

#include <cstddef>

namespace poplab::kernels {

struct Table {
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i w[i] * x[i] * y[i]  (quadrature inner product)
  double (*wdot)(const double* w, const double* x, const double* y,
                 std::size_t n);
  // sum_i w[i] * x[i]^3
  double (*wsum3)(const double* w, const double* x, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  double (*min)(const double* x, std::size_t n);
  // 1D Neumann Laplacian, mirrored ghost nodes, out[i] ~ u''(x_i)
  void (*lap1d)(const double* u, double* out, std::size_t n, double inv_h2);
  // 2D five-point Neumann Laplacian on an n-by-n row-major grid
  void (*lap2d)(const double* u, double* out, std::size_t n, double inv_h2);
};

const Table& scalar_table();
// Null when the host lacks AVX2 or the build does not carry the variant.
const Table* avx2_table();
const Table& active();

}  // namespace poplab::kernels
