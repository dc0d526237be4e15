#include "poplab/calculus.hpp"

#include <cmath>
#include <stdexcept>

#include "poplab/kernels.hpp"

namespace poplab {

namespace {
const kernels::Table& K() { return kernels::active(); }
}  // namespace

Field apply_neumann_laplacian(const Field& u) {
  const Grid& g = u.grid();
  Field out(g);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  if (g.dim() == 1)
    K().lap1d(u.data(), out.data(), u.size(), inv_h2);
  else
    K().lap2d(u.data(), out.data(), g.n_per_axis(), inv_h2);
  out.check_finite("apply_neumann_laplacian");
  return out;
}

double integrate(const Field& u) {
  return K().dot(u.grid().weights().data(), u.data(), u.size());
}

double inner(const Field& u, const Field& v) {
  return K().wdot(u.grid().weights().data(), u.data(), v.data(), u.size());
}

double integral_pow3(const Field& u) {
  return K().wsum3(u.grid().weights().data(), u.data(), u.size());
}

double gradient_form(const Field& coef, const Field& u, const Field& v) {
  const Grid& g = u.grid();
  const int n = g.n_per_axis();
  const double h = g.spacing();
  const double inv_h = 1.0 / h;
  double acc = 0.0;
  if (g.dim() == 1) {
    const double* c = coef.data();
    const double* a = u.data();
    const double* b = v.data();
    for (int i = 0; i + 1 < n; ++i) {
      const double cm = 0.5 * (c[i] + c[i + 1]);
      acc += cm * (a[i + 1] - a[i]) * (b[i + 1] - b[i]) * inv_h;
    }
  } else {
    const auto& aw = g.axis_weights();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const std::size_t p = g.index(i, j);
        if (i + 1 < n) {  // x-edge, transverse weight aw[j]
          const std::size_t q = g.index(i + 1, j);
          const double cm = 0.5 * (coef[p] + coef[q]);
          acc += cm * (u[q] - u[p]) * (v[q] - v[p]) * inv_h * aw[j];
        }
        if (j + 1 < n) {  // y-edge, transverse weight aw[i]
          const std::size_t q = g.index(i, j + 1);
          const double cm = 0.5 * (coef[p] + coef[q]);
          acc += cm * (u[q] - u[p]) * (v[q] - v[p]) * inv_h * aw[i];
        }
      }
    }
  }
  return acc;
}

double dirichlet_energy(const Field& u) {
  Field one(u.grid(), 1.0);
  return gradient_form(one, u, u);
}

double tv_norm(const Field& u) {
  const Grid& g = u.grid();
  const int n = g.n_per_axis();
  double acc = 0.0;
  if (g.dim() == 1) {
    for (int i = 0; i + 1 < n; ++i) acc += std::fabs(u[i + 1] - u[i]);
  } else {
    const auto& aw = g.axis_weights();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t p = g.index(i, j);
        if (i + 1 < n) acc += std::fabs(u[g.index(i + 1, j)] - u[p]) * aw[j];
        if (j + 1 < n) acc += std::fabs(u[g.index(i, j + 1)] - u[p]) * aw[i];
      }
  }
  return acc;
}

double bv_norm(const Field& u) {
  double l1 = 0.0;
  const auto& w = u.grid().weights();
  for (std::size_t i = 0; i < u.size(); ++i) l1 += w[i] * std::fabs(u[i]);
  return l1 + tv_norm(u);
}

namespace {

// Even reflection: ..., 2, 1, 0, 1, 2, ..., n-1, n-2, ...
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

Field mollify(const Field& m, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("mollify: eps must lie in (0, 0.5)");
  const Grid& g = m.grid();
  const int n = g.n_per_axis();
  const double h = g.spacing();
  const int r = static_cast<int>(std::floor(eps / h));
  Field out(g);
  if (g.dim() == 1) {
    std::vector<double> k(2 * r + 1);
    double ksum = 0.0;
    for (int o = -r; o <= r; ++o) {
      const double t = (o * h) / eps;
      const double v = (std::fabs(t) < 1.0) ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
      k[o + r] = v;
      ksum += v;
    }
    for (double& v : k) v /= ksum;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int o = -r; o <= r; ++o) s += k[o + r] * m[reflect(i + o, n)];
      out[i] = s;
    }
  } else {
    const int d = 2 * r + 1;
    std::vector<double> k(static_cast<std::size_t>(d) * d);
    double ksum = 0.0;
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b) {
        const double t = std::sqrt(double(a) * a + double(b) * b) * h / eps;
        const double v = (t < 1.0) ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
        k[static_cast<std::size_t>(a + r) * d + (b + r)] = v;
        ksum += v;
      }
    for (double& v : k) v /= ksum;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int a = -r; a <= r; ++a) {
          const int ia = reflect(i + a, n);
          for (int b = -r; b <= r; ++b)
            s += k[static_cast<std::size_t>(a + r) * d + (b + r)] *
                 m[g.index(ia, reflect(j + b, n))];
        }
        out[g.index(i, j)] = s;
      }
  }
  out.check_finite("mollify");
  return out;
}

double min_value(const Field& u) { return K().min(u.data(), u.size()); }

double max_abs(const Field& u) { return K().max_abs(u.data(), u.size()); }

}  // namespace poplab
