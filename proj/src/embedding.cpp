#include <cmath>
#include <memory>
#include <random>

#include "ampse/amp.hpp"
#include "ampse/error.hpp"
#include "ampse/random.hpp"

namespace ampse {

CsInstance make_cs_instance(const EnsembleSpec& spec, const Prior& prior, double noise_var,
                            int iterations, std::uint64_t seed) {
  if (!(noise_var >= 0.0)) throw InvalidArgument("make_cs_instance: noise variance must be nonnegative");
  const auto xs = sample(prior, static_cast<std::size_t>(spec.n()), seed);
  Vector x = Eigen::Map<const Vector>(xs.data(), spec.n());
  Vector noise(spec.m());
  auto rng = make_stream(seed, {7});
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_var));
  for (int i = 0; i < spec.m(); ++i) noise(i) = noise_var > 0.0 ? normal(rng) : 0.0;
  SensingMatrix a = sample_sensing_matrix(spec, seed);
  Vector y = a.values * x + noise;
  CoupledSeOptions opts;
  opts.stop_tol = 0.0;
  SeSchedule schedule = coupled_se_run(spec.coupling, spec.delta(), noise_var, prior, iterations, opts);
  return {std::move(a), std::move(x), std::move(noise), std::move(y), std::move(schedule)};
}

ChangeOfVariables change_of_variables(const CsInstance& cs, const CsAmpTrace& trace) {
  ChangeOfVariables out;
  for (const auto& r : trace.residuals) out.r_tilde.push_back(cs.noise - r);
  out.x_tilde.push_back(cs.x - Vector::Constant(cs.x.size(), cs.schedule.prior.mean()));
  for (const auto& p : trace.pseudo_data) out.x_tilde.push_back(cs.x - p);
  return out;
}

namespace {

void check_time(int t, int max_t, const char* what) {
  if (t < 0 || t > max_t) {
    throw InvalidArgument(std::string(what) + ": iteration " + std::to_string(t) +
                          " outside the precomputed range");
  }
}

struct FamilyTables {
  Prior prior;
  Matrix sqrt_w;
  std::vector<Vector> snr;  // s(t), t = 0..max_t
  std::vector<Matrix> q;    // Q^t, t = 0..max_t
  int lr = 0;
  int lc = 0;
  int max_t = 0;
};

std::shared_ptr<const FamilyTables> make_tables(const SeSchedule& s, int max_t) {
  if (max_t < 0) throw InvalidArgument("nonlinearity family: negative horizon");
  auto tab = std::make_shared<FamilyTables>();
  tab->prior = s.prior;
  tab->sqrt_w = s.coupling.entries().cwiseSqrt();
  tab->lr = s.coupling.rows();
  tab->lc = s.coupling.cols();
  tab->max_t = max_t;
  for (int t = 0; t <= max_t; ++t) {
    tab->snr.push_back(s.snr(t));
    tab->q.push_back(schedule_q(s, t));
  }
  return tab;
}

}  // namespace

Nonlinearity cs_e_family(const SeSchedule& schedule, int max_t) {
  auto tab = make_tables(schedule, max_t);
  const int q = tab->lr + tab->lc;
  const double root_lr = std::sqrt(static_cast<double>(tab->lr));
  Nonlinearity g;
  g.dim = q;
  g.value = [tab, root_lr](std::span<const double> v, std::span<const double> y, int a, int t,
                           std::span<double> out) {
    check_time(t - 1, tab->max_t, "e family");
    const PosteriorStats st = denoise(tab->prior, y[a] - v[a], tab->snr[t - 1](a));
    const double s = root_lr * (st.mean - y[a]);
    std::ranges::fill(out, 0.0);
    for (int r = 0; r < tab->lr; ++r) out[r] = s * tab->sqrt_w(r, a);
  };
  g.jacobian = [tab, root_lr, q](std::span<const double> v, std::span<const double> y, int a, int t,
                                 std::span<double> jac) {
    check_time(t - 1, tab->max_t, "e family");
    const PosteriorStats st = denoise(tab->prior, y[a] - v[a], tab->snr[t - 1](a));
    std::ranges::fill(jac, 0.0);
    for (int r = 0; r < tab->lr; ++r) jac[r * q + a] = -root_lr * st.mean_derivative * tab->sqrt_w(r, a);
  };
  return g;
}

Nonlinearity cs_h_family(const SeSchedule& schedule, int max_t) {
  auto tab = make_tables(schedule, max_t);
  const int q = tab->lr + tab->lc;
  const double root_lr = std::sqrt(static_cast<double>(tab->lr));
  Nonlinearity g;
  g.dim = q;
  g.value = [tab, root_lr](std::span<const double> u, std::span<const double> w, int a, int t,
                           std::span<double> out) {
    check_time(t, tab->max_t, "h family");
    const double s = root_lr * (u[a] - w[a]);
    std::ranges::fill(out, 0.0);
    for (int c = 0; c < tab->lc; ++c) out[c] = s * tab->sqrt_w(a, c) * tab->q[t](a, c);
  };
  g.jacobian = [tab, root_lr, q](std::span<const double>, std::span<const double>, int a, int t,
                                 std::span<double> jac) {
    check_time(t, tab->max_t, "h family");
    std::ranges::fill(jac, 0.0);
    for (int c = 0; c < tab->lc; ++c) jac[c * q + a] = root_lr * tab->sqrt_w(a, c) * tab->q[t](a, c);
  };
  return g;
}

Matrix normalized_matrix(const SensingMatrix& a, std::uint64_t seed) {
  const EnsembleSpec& spec = a.spec;
  const int m0 = spec.m0, n0 = spec.n0;
  const double lr = spec.lr();
  Matrix out(spec.m(), spec.n());
  for (int r = 0; r < spec.lr(); ++r) {
    for (int c = 0; c < spec.lc(); ++c) {
      auto blk = out.block(r * m0, c * n0, m0, n0);
      const double w = spec.coupling(r, c);
      if (w > 0.0) {
        blk = a.values.block(r * m0, c * n0, m0, n0) / std::sqrt(lr * w);
        continue;
      }
      auto rng = make_stream(seed, {8, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(spec.m())));
      for (int j = 0; j < n0; ++j)
        for (int i = 0; i < m0; ++i) blk(i, j) = normal(rng);
    }
  }
  return out;
}

BipartiteInstance build_bipartite(const CsInstance& cs, std::uint64_t seed, int max_t) {
  const EnsembleSpec& spec = cs.a.spec;
  const int lr = spec.lr(), lc = spec.lc(), q = lr + lc;
  const int m = spec.m(), n = spec.n();
  BipartiteInstance inst;
  inst.a_tilde = normalized_matrix(cs.a, seed);
  inst.row_group_sizes.assign(lr, spec.m0);
  inst.col_group_sizes.assign(lc, spec.n0);
  inst.e = cs_e_family(cs.schedule, max_t);
  inst.h = cs_h_family(cs.schedule, max_t);
  inst.y = RowMatrix::Zero(n, q);
  inst.w = RowMatrix::Zero(m, q);
  inst.v1 = RowMatrix::Zero(n, q);
  const double mean = cs.schedule.prior.mean();
  for (int j = 0; j < n; ++j) {
    const int g = spec.col_group(j);
    inst.y(j, g) = cs.x(j);
    inst.v1(j, g) = cs.x(j) - mean;
  }
  for (int i = 0; i < m; ++i) inst.w(i, spec.row_group(i)) = cs.noise(i);
  return inst;
}

Nonlinearity embedding_nonlinearity(const SeSchedule& schedule, double delta_embed, int max_t) {
  if (!(delta_embed > 0.0)) throw InvalidArgument("embedding: delta must be positive");
  const int lr = schedule.coupling.rows();
  const double kappa = std::sqrt((delta_embed + 1.0) / delta_embed);
  auto e = std::make_shared<Nonlinearity>(cs_e_family(schedule, max_t));
  auto h = std::make_shared<Nonlinearity>(cs_h_family(schedule, max_t));
  Nonlinearity g;
  g.dim = e->dim;
  g.value = [e, h, lr, kappa](std::span<const double> x, std::span<const double> y, int a, int t,
                              std::span<double> out) {
    const bool row = a < lr;
    if (t % 2 == 0 && !row) {
      e->value(x, y, a - lr, t / 2 + 1, out);
    } else if (t % 2 == 1 && row) {
      h->value(x, y, a, t / 2 + 1, out);
    } else {
      std::ranges::fill(out, 0.0);
      return;
    }
    for (double& v : out) v *= kappa;
  };
  g.jacobian = [e, h, lr, kappa](std::span<const double> x, std::span<const double> y, int a, int t,
                                 std::span<double> jac) {
    const bool row = a < lr;
    if (t % 2 == 0 && !row) {
      e->jacobian(x, y, a - lr, t / 2 + 1, jac);
    } else if (t % 2 == 1 && row) {
      h->jacobian(x, y, a, t / 2 + 1, jac);
    } else {
      std::ranges::fill(jac, 0.0);
      return;
    }
    for (double& v : jac) v *= kappa;
  };
  return g;
}

SymmetricInstance build_embedding(const CsInstance& cs, std::uint64_t seed, int max_t) {
  const EnsembleSpec& spec = cs.a.spec;
  const int m = spec.m(), n = spec.n(), lr = spec.lr(), lc = spec.lc();
  const double delta = static_cast<double>(m) / n;
  const BipartiteInstance bip = build_bipartite(cs, seed, max_t);

  auto sub = make_stream(seed, {9});
  const std::uint64_t seed_b1 = sub(), seed_b2 = sub();
  SymmetricInstance inst;
  inst.matrix.resize(m + n, m + n);
  inst.matrix.topLeftCorner(m, m) = sample_symmetric_matrix(m, seed_b1);
  inst.matrix.bottomRightCorner(n, n) =
      sample_symmetric_matrix(n, seed_b2) * std::sqrt(static_cast<double>(n) / m);
  inst.matrix.topRightCorner(m, n) = bip.a_tilde;
  inst.matrix.bottomLeftCorner(n, m) = bip.a_tilde.transpose();
  inst.matrix *= std::sqrt(delta / (delta + 1.0));

  inst.group_sizes.assign(lr, spec.m0);
  inst.group_sizes.insert(inst.group_sizes.end(), lc, spec.n0);
  inst.nonlinearity = embedding_nonlinearity(cs.schedule, delta, max_t);
  const int q = lr + lc;
  inst.side_info.resize(m + n, q);
  inst.side_info.topRows(m) = bip.w;
  inst.side_info.bottomRows(n) = bip.y;
  inst.initial = RowMatrix::Zero(m + n, q);
  inst.initial.bottomRows(n) = bip.v1;
  return inst;
}

}  // namespace ampse
