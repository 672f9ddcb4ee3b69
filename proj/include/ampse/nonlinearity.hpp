#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace ampse {

/// N x q state, one q-vector per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-separable family g(x, y, group, t): R^q x R^q -> R^q.
///
/// `jacobian` writes the q x q matrix d g / d x in row-major order,
/// jac[r * q + c] = d g_r / d x_c. Callers must supply it analytically; the
/// Onsager terms are built from it at every iteration. The family must be
/// locally Lipschitz in x.
struct Nonlinearity {
  using ValueFn = std::function<void(std::span<const double> x, std::span<const double> y,
                                     int group, int t, std::span<double> out)>;
  using JacobianFn = std::function<void(std::span<const double> x, std::span<const double> y,
                                        int group, int t, std::span<double> jac)>;

  int dim = 1;
  ValueFn value;
  JacobianFn jacobian;
};

/// Largest |analytic - central difference| over Jacobian entries at one point.
double jacobian_fd_error(const Nonlinearity& g, std::span<const double> x,
                         std::span<const double> y, int group, int t, double step = 1e-6);

/// The null family g = 0.
Nonlinearity zero_nonlinearity(int q);

/// g(x, y, a, t) = x.
Nonlinearity identity_nonlinearity(int q);

}  // namespace ampse
