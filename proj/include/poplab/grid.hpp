#pragma once
// Uniform tensor grid on (0,1)^d, d in {1,2}, node-centered with endpoints.
// Quadrature is the tensor trapezoid rule, so weights sum to |Omega| = 1.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace poplab {

class Grid {
 public:
  Grid(int dim, int n_per_axis);

  int dim() const { return dim_; }
  int n_per_axis() const { return n_; }
  double spacing() const { return h_; }
  std::size_t node_count() const { return weights_.size(); }

  // Tensor trapezoid weight of node `idx` (row-major in 2D).
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t idx) const { return weights_[idx]; }
  // Per-axis trapezoid weights (h/2 at endpoints, h inside).
  const std::vector<double>& axis_weights() const { return axis_w_; }

  // Node coordinates; y is ignored in 1D.
  double x(std::size_t idx) const {
    return h_ * static_cast<double>(dim_ == 1 ? idx : idx / n_);
  }
  double y(std::size_t idx) const {
    return dim_ == 1 ? 0.0 : h_ * static_cast<double>(idx % n_);
  }
  std::size_t index(int i, int j = 0) const {
    return dim_ == 1 ? static_cast<std::size_t>(i)
                     : static_cast<std::size_t>(i) * n_ + j;
  }

  bool same_as(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  int n_;
  double h_;
  std::vector<double> axis_w_;
  std::vector<double> weights_;
};

class Field {
 public:
  Field(const Grid& g, double fill = 0.0)
      : grid_(&g), values_(g.node_count(), fill) {}
  Field(const Grid& g, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  const std::vector<double>& values() const { return values_; }

  // Throws if any value is NaN or infinite.
  void check_finite(const char* what) const;

 private:
  const Grid* grid_;
  std::vector<double> values_;
};

Grid build_grid(int dim, int n_per_axis);

}  // namespace poplab
