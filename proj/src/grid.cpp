#include "poplab/grid.hpp"

#include <cmath>
#include <string>

namespace poplab {

Grid::Grid(int dim, int n_per_axis) : dim_(dim), n_(n_per_axis) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("unsupported dimension " + std::to_string(dim) +
                                " (must be 1 or 2)");
  if (n_per_axis < 8)
    throw std::invalid_argument("n_per_axis must be >= 8, got " +
                                std::to_string(n_per_axis));
  h_ = 1.0 / static_cast<double>(n_ - 1);
  axis_w_.assign(n_, h_);
  axis_w_.front() = 0.5 * h_;
  axis_w_.back() = 0.5 * h_;
  if (dim_ == 1) {
    weights_ = axis_w_;
  } else {
    weights_.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        weights_[static_cast<std::size_t>(i) * n_ + j] = axis_w_[i] * axis_w_[j];
  }
}

Grid build_grid(int dim, int n_per_axis) { return Grid(dim, n_per_axis); }

Field::Field(const Grid& g, std::vector<double> values)
    : grid_(&g), values_(std::move(values)) {
  if (values_.size() != g.node_count())
    throw std::invalid_argument("field size does not match grid");
}

void Field::check_finite(const char* what) const {
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(what) + ": non-finite field value");
}

}  // namespace poplab
