#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ampse/amp.hpp"
#include "ampse/error.hpp"
#include "ampse/random.hpp"

using namespace ampse;

namespace {

SeSchedule schedule_for(const EnsembleSpec& spec, const Prior& p, double s2, int t) {
  CoupledSeOptions o;
  o.stop_tol = 0.0;
  return coupled_se_run(spec.coupling, spec.delta(), s2, p, t, o);
}

RowMatrix gaussian_rows(int n, int q, std::uint64_t seed) {
  auto rng = make_stream(seed, {99});
  std::normal_distribution<double> normal;
  RowMatrix x(n, q);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k) x(i, k) = normal(rng);
  return x;
}

}  // namespace

TEST_SUITE("cs amp") {
  TEST_CASE("compute_q examples") {
    CHECK(compute_q(band_coupling(1, 1, {1}), Vector::Constant(1, 3.7)) == Matrix::Ones(1, 1));
    const CouplingMatrix id(Matrix::Identity(2, 2));
    const Matrix q = compute_q(id, (Vector(2) << 1.0, 2.0).finished());
    CHECK(q(0, 0) == doctest::Approx(1.0));
    CHECK(q(1, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("weighted column sums of Q are one") {
    auto rng = make_stream(3);
    std::uniform_real_distribution<double> unif(0.01, 5.0);
    for (int rep = 0; rep < 50; ++rep) {
      const auto w = band_coupling(7, 5, {1.0, unif(rng), unif(rng)});
      Vector phi(7);
      for (auto& v : phi) v = unif(rng);
      const Matrix q = compute_q(w, phi);
      const Vector sums = w.entries().cwiseProduct(q).colwise().sum().transpose();
      CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("compute_q errors") {
    const auto w = band_coupling(2, 2, {1, 1});
    CHECK_THROWS_AS(compute_q(w, Vector::Constant(3, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(compute_q(w, (Vector(2) << 1.0, 0.0).finished()), InvalidArgument);
    CHECK_THROWS_AS(compute_q(w, (Vector(2) << 1.0, -2.0).finished()), InvalidArgument);
  }

  TEST_CASE("Q at t = 0 is the equal-phi limit") {
    const auto spec = EnsembleSpec(band_coupling(4, 3, {1, 0.5}), 2, 2);
    const auto s = schedule_for(spec, Prior::gaussian(0, 1), 0.1, 2);
    CHECK((schedule_q(s, 0) - compute_q(spec.coupling, Vector::Constant(4, 2.5))).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("Onsager coefficients") {
    const Vector b = compute_onsager(band_coupling(1, 1, {1}), Matrix::Ones(1, 1), Vector::Constant(1, 0.3), 0.5);
    CHECK(b(0) == doctest::Approx(0.6).epsilon(1e-15));
    const auto w = band_coupling(3, 3, {1, 1});
    CHECK(compute_onsager(w, Matrix::Ones(3, 3), Vector::Zero(3), 0.4).isZero(0.0));

    // Brute force over all (row, column) pairs with per-coordinate derivatives.
    const EnsembleSpec spec(w, 4, 5);
    const Vector phi = (Vector(3) << 0.3, 1.1, 0.7).finished();
    const Matrix q = compute_q(w, phi);
    auto rng = make_stream(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector etap(spec.n());
    for (auto& v : etap) v = unif(rng);
    Vector avg = Vector::Zero(3);
    for (int j = 0; j < spec.n(); ++j) avg(spec.col_group(j)) += etap(j) / spec.n0;
    const Vector grouped = compute_onsager(w, q, avg, spec.delta());
    for (int i = 0; i < spec.m(); ++i) {
      double direct = 0.0;
      const int r = spec.row_group(i);
      for (int j = 0; j < spec.n(); ++j) {
        const int u = spec.col_group(j);
        direct += w(r, u) * q(r, u) * etap(j) / (spec.n0 * spec.delta());
      }
      CHECK(std::abs(direct - grouped(r)) <= 1e-12);
    }
    CHECK_THROWS_AS(compute_onsager(w, Matrix::Ones(2, 3), avg, 0.4), InvalidArgument);
  }

  TEST_CASE("first estimate is the prior mean and single block reduces to textbook AMP") {
    const auto prior = Prior::bernoulli_gaussian(0.2, 1.0, 1.0);
    const EnsembleSpec spec(band_coupling(1, 1, {1}), 200, 400);
    const auto cs = make_cs_instance(spec, prior, 0.01, 6, 21);
    const auto tr = cs_amp_run(cs.a, cs.y, cs.schedule, 6, cs.x);
    CHECK(tr.estimates[0] == Vector::Constant(400, prior.mean()));
    CHECK(tr.block_mse(0, 0) == doctest::Approx((cs.x.array() - prior.mean()).square().mean()));
    CHECK(tr.onsager[0](0) == 0.0);
    for (int t = 1; t <= 6; ++t) {
      CHECK(tr.q[t - 1] == Matrix::Ones(1, 1));
      if (t > 1) CHECK(std::abs(tr.onsager[t - 1](0) - tr.eta_prime_avgs[t - 2](0) / 0.5) < 1e-15);
    }
  }

  TEST_CASE("matches a dense brute-force implementation") {
    const auto prior = Prior::discrete({{-1.0, 0.1}, {0.0, 0.8}, {2.0, 0.1}});
    const EnsembleSpec spec(band_coupling(3, 3, {1, 0.6}), 15, 20);
    const int T = 5;
    const auto cs = make_cs_instance(spec, prior, 0.02, T, 5);
    const auto tr = cs_amp_run(cs.a, cs.y, cs.schedule, T);
    const Matrix& a = cs.a.values;
    const int m = spec.m(), n = spec.n();
    Vector x = Vector::Constant(n, prior.mean()), r_prev = Vector::Zero(m);
    Matrix q_prev;
    Vector etap_prev;
    for (int t = 1; t <= T; ++t) {
      Vector b = Vector::Zero(m);
      if (t > 1) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const int rr = spec.row_group(i), u = spec.col_group(j);
            b(i) += spec.coupling(rr, u) * q_prev(rr, u) * etap_prev(j) / (spec.n0 * spec.delta());
          }
      }
      const Vector r = cs.y - a * x + b.cwiseProduct(r_prev);
      const Vector phi = cs.schedule.phi[t];
      Matrix qa(m, n);
      Vector snr = Vector::Zero(n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const int rr = spec.row_group(i), u = spec.col_group(j);
          double den = 0.0;
          for (int k = 0; k < spec.lr(); ++k) den += spec.coupling(k, u) / phi(k);
          qa(i, j) = a(i, j) / phi(rr) / den;
          snr(j) = den;
        }
      const Vector pseudo = x + qa.transpose() * r;
      Vector next(n), etap(n);
      for (int j = 0; j < n; ++j) {
        const auto st = denoise(prior, pseudo(j), snr(j));
        next(j) = st.mean;
        etap(j) = st.mean_derivative;
      }
      CHECK((tr.residuals[t - 1] - r).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((tr.pseudo_data[t - 1] - pseudo).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((tr.estimates[t] - next).cwiseAbs().maxCoeff() < 1e-12);
      q_prev = compute_q(spec.coupling, phi);
      etap_prev = etap;
      r_prev = r;
      x = next;
    }
  }

  TEST_CASE("argument errors and divergence guard") {
    const auto prior = Prior::gaussian(0, 1);
    const EnsembleSpec spec(band_coupling(2, 2, {1, 1}), 10, 10);
    const auto cs = make_cs_instance(spec, prior, 0.1, 3, 1);
    CHECK_THROWS_AS(cs_amp_run(cs.a, Vector::Zero(5), cs.schedule, 3), InvalidArgument);
    CHECK_THROWS_AS(cs_amp_run(cs.a, cs.y, cs.schedule, 0), InvalidArgument);
    CHECK_THROWS_AS(cs_amp_run(cs.a, cs.y, cs.schedule, 3, Vector::Zero(3)), InvalidArgument);
    const auto other = schedule_for(EnsembleSpec(band_coupling(2, 2, {1, 1}), 10, 20), prior, 0.1, 3);
    CHECK_THROWS_AS(cs_amp_run(cs.a, cs.y, other, 3), InvalidArgument);
    SeSchedule bad = cs.schedule;
    bad.phi[2](1) = 0.0;
    CHECK_THROWS_AS(cs_amp_run(cs.a, cs.y, bad, 3), InvalidArgument);
    CsAmpOptions tight;
    tight.divergence_limit = 1e-3;
    CHECK_THROWS_AS(cs_amp_run(cs.a, cs.y, cs.schedule, 3, std::nullopt, tight), DivergenceError);
  }

  TEST_CASE("trace CSV") {
    const EnsembleSpec spec(band_coupling(1, 1, {1}), 10, 20);
    const auto cs = make_cs_instance(spec, Prior::gaussian(0, 1), 0.1, 2, 1);
    const auto tr = cs_amp_run(cs.a, cs.y, cs.schedule, 2, cs.x);
    std::ostringstream os;
    write_trace_csv(os, "r0", 1, tr, predicted_mse_table(cs.schedule, 2));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "run_id,seed,t,block,mse_empirical,mse_predicted,onsager_norm");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
    CHECK(os.str().find("r0,1,3,0,") != std::string::npos);
  }

  TEST_CASE("single-block Bernoulli-Gaussian MSE tracks state evolution") {
    const auto prior = Prior::bernoulli_gaussian(0.1);
    const EnsembleSpec spec(band_coupling(1, 1, {1}), 2500, 5000);
    const int T = 10, seeds = 20;
    Matrix mean = Matrix::Zero(T + 1, 1);
    Matrix predicted;
    for (int s = 0; s < seeds; ++s) {
      const auto cs = make_cs_instance(spec, prior, 0.01, T, s);
      mean += cs_amp_run(cs.a, cs.y, cs.schedule, T, cs.x).block_mse / seeds;
      predicted = predicted_mse_table(cs.schedule, T);
    }
    for (int t = 0; t <= T; ++t) {
      CAPTURE(t);
      CHECK(std::abs(mean(t, 0) - predicted(t, 0)) <= 0.1 * predicted(t, 0));
    }
  }
}

TEST_SUITE("symmetric orbit") {
  TEST_CASE("null dynamics") {
    SymmetricInstance inst{sample_symmetric_matrix(30, 1), {10, 20}, RowMatrix::Zero(30, 2),
                           zero_nonlinearity(2), gaussian_rows(30, 2, 1)};
    const auto tr = symmetric_amp_run(inst, 4);
    for (int t = 1; t <= 4; ++t) CHECK(tr.states[t].isZero(0.0));
  }

  TEST_CASE("identity nonlinearity") {
    SymmetricInstance inst{sample_symmetric_matrix(40, 2), {15, 25}, RowMatrix::Zero(40, 3),
                           identity_nonlinearity(3), gaussian_rows(40, 3, 2)};
    const auto tr = symmetric_amp_run(inst, 3);
    for (const auto& b : tr.onsager) CHECK(b == Matrix::Identity(3, 3));
    const RowMatrix expect = inst.matrix * tr.states[1] - tr.states[0];
    CHECK((tr.states[2] - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tr.states[1] - RowMatrix(inst.matrix * tr.states[0])).cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.group_moments[0].size() == 2);
    const Matrix m0 = tr.states[0].topRows(15).transpose() * tr.states[0].topRows(15) / 15.0;
    CHECK((tr.group_moments[0][0] - m0).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("Onsager matrix is the average Jacobian") {
    Nonlinearity g{2,
                   [](std::span<const double> x, std::span<const double> y, int a, int t, std::span<double> out) {
                     out[0] = std::tanh(x[0] + 0.5 * x[1]) + y[0];
                     out[1] = (a + 1) * std::sin(x[1]) / (t + 1);
                   },
                   [](std::span<const double> x, auto, int a, int t, std::span<double> jac) {
                     const double c = 1.0 - std::pow(std::tanh(x[0] + 0.5 * x[1]), 2);
                     jac[0] = c;
                     jac[1] = 0.5 * c;
                     jac[2] = 0.0;
                     jac[3] = (a + 1) * std::cos(x[1]) / (t + 1);
                   }};
    SymmetricInstance inst{sample_symmetric_matrix(50, 3), {20, 30}, gaussian_rows(50, 2, 7), g,
                           gaussian_rows(50, 2, 8)};
    OrbitOptions opts;
    opts.check_jacobians = true;
    const auto tr = symmetric_amp_run(inst, 4, opts);
    for (int t = 0; t < 4; ++t) {
      Matrix avg = Matrix::Zero(2, 2);
      std::vector<double> jac(4);
      for (int i = 0; i < 50; ++i) {
        g.jacobian(std::span<const double>(tr.states[t].row(i).data(), 2),
                   std::span<const double>(inst.side_info.row(i).data(), 2), i < 20 ? 0 : 1, t, jac);
        for (int k = 0; k < 4; ++k) avg(k / 2, k % 2) += jac[k] / 50.0;
      }
      CHECK((tr.onsager[t] - avg).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("wrong Jacobians are caught in debug mode") {
    Nonlinearity g = identity_nonlinearity(1);
    g.value = [](std::span<const double> x, auto, int, int, std::span<double> out) { out[0] = 2.0 * x[0]; };
    SymmetricInstance inst{sample_symmetric_matrix(10, 1), {10}, RowMatrix::Zero(10, 1), g, gaussian_rows(10, 1, 1)};
    CHECK_NOTHROW(symmetric_amp_run(inst, 2));
    OrbitOptions opts;
    opts.check_jacobians = true;
    CHECK_THROWS_AS(symmetric_amp_run(inst, 2, opts), Error);
  }

  TEST_CASE("validation and divergence") {
    SymmetricInstance inst{sample_symmetric_matrix(10, 1), {4, 5}, RowMatrix::Zero(10, 1),
                           identity_nonlinearity(1), gaussian_rows(10, 1, 1)};
    CHECK_THROWS_AS(symmetric_amp_run(inst, 1), InvalidArgument);
    inst.group_sizes = {4, 6};
    inst.matrix(0, 1) += 1.0;
    CHECK_THROWS_AS(symmetric_amp_run(inst, 1), InvalidArgument);
    inst.matrix = sample_symmetric_matrix(10, 1);
    inst.initial = RowMatrix::Zero(10, 2);
    CHECK_THROWS_AS(symmetric_amp_run(inst, 1), InvalidArgument);
    inst.initial = gaussian_rows(10, 1, 1);
    Nonlinearity blowup{1,
                        [](std::span<const double> x, auto, int, int, std::span<double> out) { out[0] = 1e9 * x[0]; },
                        [](auto, auto, int, int, std::span<double> jac) { jac[0] = 1e9; }};
    inst.nonlinearity = blowup;
    try {
      symmetric_amp_run(inst, 5);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.iteration() >= 1);
    }
  }
}

TEST_SUITE("bipartite orbit") {
  TEST_CASE("null dynamics") {
    BipartiteInstance inst{sample_gaussian_matrix(6, 8, 1.0 / 6, 1), {6}, {4, 4}, zero_nonlinearity(2),
                           zero_nonlinearity(2), gaussian_rows(8, 2, 1), gaussian_rows(6, 2, 2), gaussian_rows(8, 2, 3)};
    const auto tr = bipartite_amp_run(inst, 3);
    for (int t = 0; t < 3; ++t) {
      CHECK(tr.u[t].isZero(0.0));
      CHECK(tr.v[t + 1].isZero(0.0));
    }
  }

  TEST_CASE("one step by hand, m = n = q = 2, linear e and h") {
    Matrix a(2, 2);
    a << 1.0, 2.0, -1.0, 0.5;
    Matrix ge(2, 2), gh(2, 2);
    ge << 2.0, 1.0, 0.0, 3.0;
    gh << 1.0, -1.0, 4.0, 0.5;
    auto linear = [](Matrix gm) {
      return Nonlinearity{2,
                          [gm](std::span<const double> x, auto, int, int, std::span<double> out) {
                            out[0] = gm(0, 0) * x[0] + gm(0, 1) * x[1];
                            out[1] = gm(1, 0) * x[0] + gm(1, 1) * x[1];
                          },
                          [gm](auto, auto, int, int, std::span<double> jac) {
                            jac[0] = gm(0, 0), jac[1] = gm(0, 1), jac[2] = gm(1, 0), jac[3] = gm(1, 1);
                          }};
    };
    RowMatrix v1(2, 2);
    v1 << 1.0, 0.0, 0.0, 1.0;
    BipartiteInstance inst{a, {2}, {2}, linear(ge), linear(gh), RowMatrix::Zero(2, 2), RowMatrix::Zero(2, 2), v1};
    const auto tr = bipartite_amp_run(inst, 1);
    // e(v1) rows: (2, 0) and (1, 3). u1 = A e(v1) = [[4, 6], [-1.5, 1.5]].
    RowMatrix u1(2, 2);
    u1 << 4.0, 6.0, -1.5, 1.5;
    CHECK((tr.u[0] - u1).cwiseAbs().maxCoeff() < 1e-15);
    // B_1 = (1/m) sum of Jacobians of e = (2/2) ge = ge; D_1 = gh.
    CHECK((tr.b[0] - ge).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((tr.d[0] - gh).cwiseAbs().maxCoeff() < 1e-15);
    // h(u1) rows: (-2, 19), (-3, -5.25); A^T h = [[1, 24.25], [-5.5, 35.375]].
    // e(v1) D^T rows: (2, 8), (-2, 5.5); v2 = difference.
    RowMatrix v2(2, 2);
    v2 << -1.0, 16.25, -3.5, 29.875;
    CHECK((tr.v[1] - v2).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("validation") {
    BipartiteInstance inst{sample_gaussian_matrix(6, 8, 1.0 / 6, 1), {6}, {4, 3}, zero_nonlinearity(2),
                           zero_nonlinearity(2), gaussian_rows(8, 2, 1), gaussian_rows(6, 2, 2), gaussian_rows(8, 2, 3)};
    CHECK_THROWS_AS(bipartite_amp_run(inst, 1), InvalidArgument);
    inst.col_group_sizes = {4, 4};
    inst.h = zero_nonlinearity(3);
    CHECK_THROWS_AS(bipartite_amp_run(inst, 1), InvalidArgument);
  }
}

namespace {

double rel_gap(const Eigen::Ref<const Matrix>& got, const Eigen::Ref<const Matrix>& want) {
  return ((got - want).array().abs() / want.array().abs().max(1.0)).maxCoeff();
}

struct EmbedRun {
  CsInstance cs;
  CsAmpTrace cs_trace;
  BipartiteTrace bip;
};

EmbedRun run_embed(const EnsembleSpec& spec, int t_max, std::uint64_t seed) {
  const auto prior = Prior::bernoulli_gaussian(0.2, 0.5, 1.0);
  auto cs = make_cs_instance(spec, prior, 0.01, t_max, seed);
  auto tr = cs_amp_run(cs.a, cs.y, cs.schedule, t_max);
  OrbitOptions opts;
  opts.check_jacobians = true;
  auto bip = bipartite_amp_run(build_bipartite(cs, seed, t_max), t_max, opts);
  return {std::move(cs), std::move(tr), std::move(bip)};
}

}  // namespace

TEST_SUITE("embedding") {
  TEST_CASE("normalized matrix undoes the block scaling and fills empty blocks") {
    const EnsembleSpec spec(band_coupling(3, 2, {1, 0.5}), 30, 40);
    const auto a = sample_sensing_matrix(spec, 2);
    const Matrix at = normalized_matrix(a, 2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) {
        const double w = spec.coupling(r, c);
        const auto blk = at.block(r * 30, c * 40, 30, 40);
        if (w > 0) {
          CHECK(rel_gap(blk * std::sqrt(3 * w), a.values.block(r * 30, c * 40, 30, 40)) < 1e-15);
        } else {
          CHECK(blk.squaredNorm() / (30 * 40) == doctest::Approx(1.0 / 90).epsilon(0.15));
        }
      }
    CHECK(spec.coupling(2, 0) == 0.0);
  }

  TEST_CASE("bipartite coordinates reproduce the change of variables") {
    for (const auto& [coupling, m0, n0] : {std::tuple{band_coupling(2, 2, {1, 0.5}), 10, 20},
                                          std::tuple{band_coupling(3, 2, {1, 1}), 7, 20}}) {
      const EnsembleSpec spec(coupling, m0, n0);
      const int T = 6;
      const auto run = run_embed(spec, T, 11);
      const auto cv = change_of_variables(run.cs, run.cs_trace);
      for (int t = 1; t <= T; ++t) {
        CAPTURE(t);
        Vector u(spec.m()), v(spec.n());
        for (int i = 0; i < spec.m(); ++i) u(i) = run.bip.u[t - 1](i, spec.row_group(i));
        for (int j = 0; j < spec.n(); ++j) v(j) = run.bip.v[t](j, spec.col_group(j));
        CHECK(rel_gap(u, cv.r_tilde[t - 1]) < 1e-8);
        CHECK(rel_gap(v, cv.x_tilde[t]) < 1e-8);
      }
      CHECK(rel_gap(run.bip.v[0].rowwise().sum(), cv.x_tilde[0]) == 0.0);
    }
  }

  TEST_CASE("symmetric embedding reproduces the bipartite orbit") {
    for (const auto& [coupling, m0, n0, T] : {std::tuple{band_coupling(2, 2, {1, 0.5}), 10, 20, 6},
                                             std::tuple{band_coupling(3, 3, {1, 1}), 20, 40, 6},
                                             std::tuple{band_coupling(3, 2, {1, 1}), 7, 20, 4}}) {
      const EnsembleSpec spec(coupling, m0, n0);
      const auto run = run_embed(spec, T, 17);
      const auto inst = build_embedding(run.cs, 17, T);
      const auto sym = symmetric_amp_run(inst, 2 * T);
      const int m = spec.m(), n = spec.n();
      for (int t = 0; t < T; ++t) {
        CAPTURE(t);
        CHECK(rel_gap(sym.states[2 * t].bottomRows(n), run.bip.v[t]) < 1e-8);
        CHECK(rel_gap(sym.states[2 * t + 1].topRows(m), run.bip.u[t]) < 1e-8);
      }
      CHECK(rel_gap(sym.states[2 * T].bottomRows(n), run.bip.v[T]) < 1e-8);
    }
  }

  TEST_CASE("embedding matrix is symmetric with the expected blocks") {
    const EnsembleSpec spec(band_coupling(2, 2, {1, 1}), 10, 20);
    const auto cs = make_cs_instance(spec, Prior::gaussian(0, 1), 0.1, 2, 3);
    const auto inst = build_embedding(cs, 3, 2);
    CHECK(inst.matrix.rows() == 60);
    CHECK(inst.matrix.isApprox(inst.matrix.transpose(), 0.0));
    const double scale = std::sqrt(0.5 / 1.5);
    CHECK(rel_gap(inst.matrix.topRightCorner(20, 40) / scale, normalized_matrix(cs.a, 3)) < 1e-14);
    CHECK(inst.group_sizes == std::vector<int>{10, 10, 20, 20});
    CHECK(inst.initial.topRows(20).isZero(0.0));
  }

  TEST_CASE("families reject steps beyond the precomputed schedule") {
    const EnsembleSpec spec(band_coupling(1, 1, {1}), 5, 10);
    const auto cs = make_cs_instance(spec, Prior::gaussian(0, 1), 0.1, 2, 1);
    const auto h = cs_h_family(cs.schedule, 2);
    std::vector<double> x(2, 0.0), out(2);
    CHECK_NOTHROW(h.value(x, x, 0, 2, out));
    CHECK_THROWS_AS(h.value(x, x, 0, 3, out), InvalidArgument);
    CHECK_THROWS_AS(embedding_nonlinearity(cs.schedule, 0.0, 2), InvalidArgument);
  }
}
