#include "poplab/linops.hpp"

#include <Eigen/SparseCholesky>
#include <stdexcept>
#include <vector>

namespace poplab {

Eigen::SparseMatrix<double> laplacian_matrix(const Grid& g) {
  const int n = g.n_per_axis();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  std::vector<Eigen::Triplet<double>> trips;
  auto add_axis = [&](auto index_of) {
    for (int i = 0; i < n; ++i) {
      const int im = (i == 0) ? 1 : i - 1;
      const int ip = (i == n - 1) ? n - 2 : i + 1;
      index_of(i, im, ip);
    }
  };
  if (g.dim() == 1) {
    trips.reserve(3 * n);
    add_axis([&](int i, int im, int ip) {
      trips.emplace_back(i, i, -2.0 * inv_h2);
      trips.emplace_back(i, im, inv_h2);
      trips.emplace_back(i, ip, inv_h2);
    });
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
  }
  const std::size_t N = g.node_count();
  trips.reserve(5 * N);
  for (int i = 0; i < n; ++i) {
    const int im = (i == 0) ? 1 : i - 1;
    const int ip = (i == n - 1) ? n - 2 : i + 1;
    for (int j = 0; j < n; ++j) {
      const int jm = (j == 0) ? 1 : j - 1;
      const int jp = (j == n - 1) ? n - 2 : j + 1;
      const int row = static_cast<int>(g.index(i, j));
      trips.emplace_back(row, row, -4.0 * inv_h2);
      trips.emplace_back(row, static_cast<int>(g.index(im, j)), inv_h2);
      trips.emplace_back(row, static_cast<int>(g.index(ip, j)), inv_h2);
      trips.emplace_back(row, static_cast<int>(g.index(i, jm)), inv_h2);
      trips.emplace_back(row, static_cast<int>(g.index(i, jp)), inv_h2);
    }
  }
  Eigen::SparseMatrix<double> L(static_cast<int>(N), static_cast<int>(N));
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

Eigen::SparseMatrix<double> weighted_operator_matrix(const Grid& g, double mu,
                                                     const Field& q) {
  Eigen::SparseMatrix<double> L = laplacian_matrix(g);
  const std::size_t N = g.node_count();
  Eigen::VectorXd w(N);
  for (std::size_t i = 0; i < N; ++i) w[static_cast<int>(i)] = g.weight(i);
  Eigen::SparseMatrix<double> S = w.asDiagonal() * L;
  S *= -mu;
  for (std::size_t i = 0; i < N; ++i) {
    const int k = static_cast<int>(i);
    S.coeffRef(k, k) -= g.weight(i) * q[i];
  }
  S.makeCompressed();
  return S;
}

struct LinearizedOperator::Impl {
  Eigen::SparseMatrix<double> matrix;
  Eigen::SparseMatrix<double> lap;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool use_ldlt = true;
};

LinearizedOperator::LinearizedOperator(const Grid& g, double mu,
                                       const Field& q)
    : grid_(&g), mu_(mu), q_(q), impl_(std::make_unique<Impl>()) {
  impl_->matrix = weighted_operator_matrix(g, mu, q);
  impl_->lap = laplacian_matrix(g);
  const Eigen::SparseMatrix<double>& S = impl_->matrix;
  impl_->ldlt.compute(S);
  if (impl_->ldlt.info() != Eigen::Success) {
    impl_->use_ldlt = false;
    impl_->lu.compute(S);
    if (impl_->lu.info() != Eigen::Success)
      throw std::runtime_error("LinearizedOperator: factorization failed");
  }
}

LinearizedOperator::~LinearizedOperator() = default;
LinearizedOperator::LinearizedOperator(LinearizedOperator&&) noexcept = default;

Field LinearizedOperator::solve(const Field& rhs) const {
  const std::size_t N = grid_->node_count();
  Eigen::VectorXd b(N);
  for (std::size_t i = 0; i < N; ++i)
    b[static_cast<int>(i)] = grid_->weight(i) * rhs[i];
  auto backsolve = [&](const Eigen::VectorXd& v) {
    return impl_->use_ldlt ? impl_->ldlt.solve(v).eval()
                           : impl_->lu.solve(v).eval();
  };
  Eigen::VectorXd x = backsolve(b);
  // Iterative refinement with an extended-precision residual. The residual
  // is evaluated from the unrounded components (Laplacian stencil, weights,
  // reaction coefficient) rather than the assembled matrix: summing the small
  // mass term into the large Laplacian diagonal rounds away low-order bits
  // and would otherwise cap the forward accuracy near 1e-12.
  const Eigen::SparseMatrix<double>& L = impl_->lap;
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<long double> acc(N);
    for (std::size_t i = 0; i < N; ++i) acc[i] = 0.0L;
    for (int k = 0; k < L.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
        acc[static_cast<std::size_t>(it.row())] +=
            static_cast<long double>(it.value()) * x[it.col()];
    for (std::size_t i = 0; i < N; ++i) {
      const int k = static_cast<int>(i);
      const long double w = grid_->weight(i);
      acc[i] = w * static_cast<long double>(rhs[i]) +
               static_cast<long double>(mu_) * w * acc[i] +
               w * static_cast<long double>(q_[i]) * x[k];
    }
    Eigen::VectorXd res(N);
    for (std::size_t i = 0; i < N; ++i)
      res[static_cast<int>(i)] = static_cast<double>(acc[i]);
    Eigen::VectorXd dx = backsolve(res);
    x += dx;
    if (dx.lpNorm<Eigen::Infinity>() <
        1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>()))
      break;
  }
  Field out(*grid_);
  for (std::size_t i = 0; i < N; ++i) out[i] = x[static_cast<int>(i)];
  out.check_finite("LinearizedOperator::solve");
  return out;
}

}  // namespace poplab
