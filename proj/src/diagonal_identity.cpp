#include <cmath>
#include <random>

#include "ampse/amp.hpp"
#include "ampse/error.hpp"
#include "ampse/se.hpp"

namespace ampse {

DiagonalIdentityReport verify_diagonal_identity(const CouplingMatrix& w, double delta,
                                                double noise_var, const Prior& prior,
                                                int iterations, const GeneralSeOptions& opts) {
  if (iterations < 1) throw InvalidArgument("diagonal identity: need at least one iteration");
  const int lr = w.rows(), lc = w.cols(), q = lr + lc;
  CoupledSeOptions se_opts;
  se_opts.stop_tol = 0.0;
  const SeSchedule schedule = coupled_se_run(w, delta, noise_var, prior, iterations, se_opts);

  // Embedding on N = m + n with m/n = delta Lr / Lc; row groups hold m0 and
  // column groups n0 coordinates.
  const double delta_embed = delta * lr / lc;
  const double denom = delta * lr + lc;
  std::vector<double> fractions(q);
  for (int a = 0; a < lr; ++a) fractions[a] = delta / denom;
  for (int a = 0; a < lc; ++a) fractions[lr + a] = 1.0 / denom;

  std::vector<SideInfoSampler> samplers;
  const double sd = std::sqrt(noise_var);
  for (int a = 0; a < lr; ++a) {
    samplers.push_back([a, sd](Engine& rng, std::span<double> y) {
      y[a] = sd > 0.0 ? std::normal_distribution<double>(0.0, sd)(rng) : 0.0;
    });
  }
  // Discrete component choice followed by a Gaussian draw, as in sample().
  std::vector<double> weights;
  for (const auto& at : prior.atoms) weights.push_back(at.weight);
  for (const auto& gc : prior.gaussians) weights.push_back(gc.weight);
  for (int a = 0; a < lc; ++a) {
    samplers.push_back([a, prior, weights](Engine& rng, std::span<double> y) {
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      const std::size_t k = pick(rng);
      if (k < prior.atoms.size()) {
        y[a] = prior.atoms[k].value;
      } else {
        const auto& gc = prior.gaussians[k - prior.atoms.size()];
        y[a] = std::normal_distribution<double>(gc.mean, std::sqrt(gc.variance))(rng);
      }
    });
  }

  // SigmaHat^0: e(v^1, y; 1) = sqrt(Lr) (E X - X) [sqrt(W_{r,a})]_r on column groups.
  const double kappa2 = (delta_embed + 1.0) / delta_embed;
  const double var = variance(prior);
  std::vector<Matrix> hat0(q, Matrix::Zero(q, q));
  for (int a = 0; a < lc; ++a)
    for (int r = 0; r < lr; ++r)
      for (int s = 0; s < lr; ++s)
        hat0[lr + a](r, s) = kappa2 * lr * var * std::sqrt(w(r, a) * w(s, a));

  const Nonlinearity g = embedding_nonlinearity(schedule, delta_embed, iterations);
  const auto states = general_se_run(fractions, samplers, g, hat0, 2 * iterations, opts);

  DiagonalIdentityReport rep;
  rep.iterations = iterations;
  rep.general = Matrix::Zero(iterations + 1, lc);
  rep.coupled = Matrix::Zero(iterations + 1, lc);
  rep.rel_deviation = Matrix::Zero(iterations + 1, lc);
  for (int t = 1; t <= iterations; ++t) {
    const Matrix& sigma = states[2 * t - 1].sigma;
    const Vector s = schedule.snr(t);
    for (int a = 0; a < lc; ++a) {
      rep.general(t, a) = 1.0 / sigma(a, a);
      rep.coupled(t, a) = s(a);
      rep.rel_deviation(t, a) = std::abs(rep.general(t, a) - s(a)) / std::abs(s(a));
    }
    const Matrix qt = schedule_q(schedule, t);
    const Vector colsum = w.entries().cwiseProduct(qt).colwise().sum().transpose();
    rep.q_identity_error = std::max(rep.q_identity_error, (colsum.array() - 1.0).abs().maxCoeff());
  }
  rep.max_rel_deviation = rep.rel_deviation.maxCoeff();
  return rep;
}

}  // namespace ampse
