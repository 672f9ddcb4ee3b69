#include <cmath>
#include <numeric>
#include <sstream>

#include "ampse/amp.hpp"
#include "ampse/error.hpp"

namespace ampse {

namespace {

std::vector<int> row_groups(const std::vector<int>& sizes) {
  std::vector<int> g;
  for (int a = 0; a < static_cast<int>(sizes.size()); ++a) g.insert(g.end(), sizes[a], a);
  return g;
}

void check_partition(const std::vector<int>& sizes, long total, const char* what) {
  if (sizes.empty()) throw InvalidArgument(std::string(what) + ": no groups");
  long sum = 0;
  for (int s : sizes) {
    if (s <= 0) throw InvalidArgument(std::string(what) + ": group sizes must be positive");
    sum += s;
  }
  if (sum != total) throw InvalidArgument(std::string(what) + ": group sizes do not sum to the dimension");
}

void check_family(const Nonlinearity& g, int q, const char* what) {
  if (g.dim != q) throw InvalidArgument(std::string(what) + ": nonlinearity dimension mismatch");
  if (!g.value || !g.jacobian) throw InvalidArgument(std::string(what) + ": nonlinearity needs value and Jacobian");
}

// Applies g row by row and returns f together with the summed Jacobian.
struct Applied {
  RowMatrix f;
  Matrix jac_sum;
};

Applied apply_family(const Nonlinearity& g, const RowMatrix& x, const RowMatrix& y,
                     const std::vector<int>& groups, int t, const OrbitOptions& opts) {
  const int q = g.dim;
  const auto rows = x.rows();
  Applied out{RowMatrix(rows, q), Matrix::Zero(q, q)};
  std::vector<double> jac(q * q);
  int last_checked = -1;
  for (Eigen::Index i = 0; i < rows; ++i) {
    std::span<const double> xi(x.row(i).data(), q), yi(y.row(i).data(), q);
    g.value(xi, yi, groups[i], t, std::span<double>(out.f.row(i).data(), q));
    g.jacobian(xi, yi, groups[i], t, jac);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < q; ++c) out.jac_sum(r, c) += jac[r * q + c];
    if (opts.check_jacobians && groups[i] != last_checked) {
      last_checked = groups[i];
      double scale = 1.0;
      for (double v : jac) scale = std::max(scale, std::abs(v));
      const double err = jacobian_fd_error(g, xi, yi, groups[i], t);
      if (err > opts.jacobian_tol * scale) {
        std::ostringstream os;
        os << "Jacobian of group " << groups[i] << " at t = " << t
           << " disagrees with finite differences by " << err;
        throw Error(os.str());
      }
    }
  }
  return out;
}

void check_state(const RowMatrix& x, double limit, int t, const char* what) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double v = x(i, k);
      if (!std::isfinite(v) || std::abs(v) > limit) {
        std::ostringstream os;
        os << what << " orbit diverged at t = " << t << ": entry (" << i << ", " << k << ") = " << v;
        throw DivergenceError(os.str(), t);
      }
    }
  }
}

}  // namespace

void SymmetricInstance::validate() const {
  const auto n = matrix.rows();
  if (matrix.cols() != n) throw InvalidArgument("symmetric instance: matrix must be square");
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double a = matrix(i, j), b = matrix(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
        throw InvalidArgument("symmetric instance: matrix is not symmetric");
      }
    }
  }
  check_partition(group_sizes, n, "symmetric instance");
  const int q = nonlinearity.dim;
  check_family(nonlinearity, q, "symmetric instance");
  if (side_info.rows() != n || side_info.cols() != q) throw InvalidArgument("symmetric instance: side information must be N x q");
  if (initial.rows() != n || initial.cols() != q) throw InvalidArgument("symmetric instance: initial state must be N x q");
}

std::vector<Matrix> group_second_moments(const RowMatrix& x, const std::vector<int>& group_sizes) {
  std::vector<Matrix> out;
  Eigen::Index start = 0;
  for (int s : group_sizes) {
    const auto block = x.middleRows(start, s);
    out.push_back(block.transpose() * block / static_cast<double>(s));
    start += s;
  }
  return out;
}

OrbitTrace symmetric_amp_run(const SymmetricInstance& inst, int iterations, const OrbitOptions& opts) {
  inst.validate();
  if (iterations < 0) throw InvalidArgument("symmetric_amp_run: negative iteration count");
  const int q = inst.nonlinearity.dim;
  const double n = static_cast<double>(inst.matrix.rows());
  const auto groups = row_groups(inst.group_sizes);

  OrbitTrace tr;
  tr.states.push_back(inst.initial);
  tr.group_moments.push_back(group_second_moments(inst.initial, inst.group_sizes));
  RowMatrix f_prev = RowMatrix::Zero(inst.matrix.rows(), q);
  for (int t = 0; t < iterations; ++t) {
    Applied cur = apply_family(inst.nonlinearity, tr.states.back(), inst.side_info, groups, t, opts);
    Matrix b = cur.jac_sum / n;
    RowMatrix next = inst.matrix * cur.f;
    next.noalias() -= f_prev * b.transpose();
    check_state(next, opts.divergence_limit, t + 1, "symmetric");
    tr.onsager.push_back(std::move(b));
    tr.group_moments.push_back(group_second_moments(next, inst.group_sizes));
    tr.states.push_back(std::move(next));
    f_prev = std::move(cur.f);
  }
  return tr;
}

void BipartiteInstance::validate() const {
  const auto m = a_tilde.rows(), n = a_tilde.cols();
  check_partition(row_group_sizes, m, "bipartite instance rows");
  check_partition(col_group_sizes, n, "bipartite instance columns");
  const int q = e.dim;
  check_family(e, q, "bipartite instance (e)");
  check_family(h, q, "bipartite instance (h)");
  if (y.rows() != n || y.cols() != q) throw InvalidArgument("bipartite instance: y must be n x q");
  if (w.rows() != m || w.cols() != q) throw InvalidArgument("bipartite instance: w must be m x q");
  if (v1.rows() != n || v1.cols() != q) throw InvalidArgument("bipartite instance: v1 must be n x q");
}

BipartiteTrace bipartite_amp_run(const BipartiteInstance& inst, int iterations, const OrbitOptions& opts) {
  inst.validate();
  if (iterations < 0) throw InvalidArgument("bipartite_amp_run: negative iteration count");
  const int q = inst.e.dim;
  const double m = static_cast<double>(inst.a_tilde.rows());
  const auto rgroups = row_groups(inst.row_group_sizes);
  const auto cgroups = row_groups(inst.col_group_sizes);

  BipartiteTrace tr;
  tr.v.push_back(inst.v1);
  RowMatrix h_prev = RowMatrix::Zero(inst.a_tilde.rows(), q);
  for (int t = 1; t <= iterations; ++t) {
    Applied e = apply_family(inst.e, tr.v.back(), inst.y, cgroups, t, opts);
    Matrix b = e.jac_sum / m;
    RowMatrix u = inst.a_tilde * e.f;
    u.noalias() -= h_prev * b.transpose();
    check_state(u, opts.divergence_limit, t, "bipartite (u)");

    Applied h = apply_family(inst.h, u, inst.w, rgroups, t, opts);
    Matrix d = h.jac_sum / m;
    RowMatrix v = inst.a_tilde.transpose() * h.f;
    v.noalias() -= e.f * d.transpose();
    check_state(v, opts.divergence_limit, t + 1, "bipartite (v)");

    tr.u.push_back(std::move(u));
    tr.v.push_back(std::move(v));
    tr.b.push_back(std::move(b));
    tr.d.push_back(std::move(d));
    h_prev = std::move(h.f);
  }
  return tr;
}

}  // namespace ampse
