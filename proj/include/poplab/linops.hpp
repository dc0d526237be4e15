#pragma once
// Sparse-matrix forms of the grid operators. The quadrature-weighted matrix
// W*(-mu*Lap - diag(q)) is symmetric; factorizations of it back the adjoint,
// Gateaux and eigen solves.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "poplab/grid.hpp"

namespace poplab {

// Matrix of the mirrored-ghost Neumann Laplacian (row sums are zero).
Eigen::SparseMatrix<double> laplacian_matrix(const Grid& g);

// Symmetric matrix S = W * (-mu*Lap - diag(q)).
Eigen::SparseMatrix<double> weighted_operator_matrix(const Grid& g, double mu,
                                                     const Field& q);

// Solves (-mu*Lap - diag(q)) x = rhs through the symmetric form S x = W rhs.
// The factorization is computed once and reused across right-hand sides.
class LinearizedOperator {
 public:
  LinearizedOperator(const Grid& g, double mu, const Field& q);
  ~LinearizedOperator();
  LinearizedOperator(LinearizedOperator&&) noexcept;

  Field solve(const Field& rhs) const;
  double mu() const { return mu_; }
  const Field& potential() const { return q_; }

 private:
  const Grid* grid_;
  double mu_;
  Field q_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace poplab
