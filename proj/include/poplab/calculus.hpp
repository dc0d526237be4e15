#pragma once
// Discrete field calculus: Laplacian, quadrature, Dirichlet energy, TV/BV
// norms and mollification. The Laplacian uses mirrored ghost nodes, which
// makes it self-adjoint in the trapezoid inner product; the edge-based
// gradient forms below satisfy the discrete Green identity
//   integrate(v * lap(u)) == -grad_form(1, u, v)
// up to round-off.

#include "poplab/grid.hpp"

namespace poplab {

Field apply_neumann_laplacian(const Field& u);

double integrate(const Field& u);
// integral of u*v
double inner(const Field& u, const Field& v);
// integral of u^3
double integral_pow3(const Field& u);

// integral of coef * grad(u) . grad(v), edge-based with arithmetic-mean
// coefficient; coef == 1 gives the plain Dirichlet form.
double gradient_form(const Field& coef, const Field& u, const Field& v);
double dirichlet_energy(const Field& u);  // integral of |grad u|^2

// Anisotropic discrete total variation: sum over axis-adjacent node pairs of
// |jump| times the transverse trapezoid measure. Interior jumps only.
double tv_norm(const Field& u);
// integral |u| + tv_norm
double bv_norm(const Field& u);

// Convolution with the normalized bump (1-|x/eps|^2)^2, field extended by
// even reflection across the boundary. Requires 0 < eps < 0.5.
Field mollify(const Field& m, double eps);

double min_value(const Field& u);
double max_abs(const Field& u);

}  // namespace poplab
