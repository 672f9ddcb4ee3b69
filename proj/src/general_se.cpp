#include "ampse/se.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ampse/error.hpp"
#include "parallel.hpp"

namespace ampse {

namespace {

struct BatchPlan {
  std::size_t count;
  std::size_t size;
  std::size_t samples(std::size_t k, std::size_t total) const {
    return std::min(size, total - k * size);
  }
};

BatchPlan plan_batches(const GeneralSeOptions& opts) {
  if (opts.mc_samples == 0) throw InvalidArgument("general SE: mc_samples must be positive");
  const std::size_t size = std::max<std::size_t>(1, opts.batch_size);
  return {(opts.mc_samples + size - 1) / size, size};
}

// Mean and standard error of per-batch averages, weighted by batch size.
template <class T>
void fold_batches(const std::vector<T>& means, const std::vector<std::size_t>& sizes, T& mean, T& se) {
  const std::size_t nb = means.size();
  double total = 0.0;
  mean = means[0] * 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    mean = mean + means[k] * static_cast<double>(sizes[k]);
    total += static_cast<double>(sizes[k]);
  }
  mean = mean / total;
  se = means[0] * 0.0;
  if (nb < 2) return;
  T acc = means[0] * 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    T d = means[k] - mean;
    if constexpr (std::is_same_v<T, double>) {
      acc = acc + d * d;
    } else {
      acc = acc + Matrix(d.array().square());
    }
  }
  const double scale = 1.0 / (static_cast<double>(nb) * static_cast<double>(nb - 1));
  if constexpr (std::is_same_v<T, double>) {
    se = std::sqrt(acc * scale);
  } else {
    se = (acc * scale).array().sqrt().matrix();
  }
}

}  // namespace

Matrix psd_sqrt(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw InvalidArgument("psd_sqrt: matrix must be square");
  if (!sigma.allFinite()) throw Error("psd_sqrt: non-finite covariance");
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-8) {
    std::ostringstream os;
    os << "covariance has eigenvalue " << ev.minCoeff() << " < -1e-8";
    throw Error(os.str());
  }
  const double floor = 1e-12 * std::max(sym.trace(), 0.0);
  for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) <= floor ? 0.0 : std::sqrt(ev(i));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<GeneralSeState> general_se_run(std::span<const double> group_fractions,
                                           std::span<const SideInfoSampler> samplers,
                                           const Nonlinearity& g,
                                           std::span<const Matrix> sigma_hat0, int iterations,
                                           const GeneralSeOptions& opts) {
  const std::size_t groups = group_fractions.size();
  const int q = g.dim;
  if (groups == 0 || samplers.size() != groups || sigma_hat0.size() != groups) {
    throw InvalidArgument("general SE: fractions, samplers and initial matrices must align");
  }
  double total = 0.0;
  for (double c : group_fractions) {
    if (!(c > 0.0)) throw InvalidArgument("general SE: group fractions must be positive");
    total += c;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("general SE: group fractions must sum to 1");
  for (const auto& m : sigma_hat0) {
    if (m.rows() != q || m.cols() != q) throw InvalidArgument("general SE: initial matrix shape");
    psd_sqrt(m);
  }
  if (iterations < 1) throw InvalidArgument("general SE: need at least one iteration");

  const BatchPlan plan = plan_batches(opts);
  std::vector<GeneralSeState> states;
  std::vector<Matrix> prev(sigma_hat0.begin(), sigma_hat0.end());
  for (int t = 1; t <= iterations; ++t) {
    GeneralSeState st;
    st.t = t;
    st.sigma = Matrix::Zero(q, q);
    for (std::size_t b = 0; b < groups; ++b) st.sigma += group_fractions[b] * prev[b];
    st.sigma = 0.5 * (st.sigma + st.sigma.transpose());
    const Matrix root = psd_sqrt(st.sigma);

    std::vector<Matrix> batch_means(groups * plan.count);
    std::vector<std::size_t> batch_sizes(plan.count);
    for (std::size_t k = 0; k < plan.count; ++k) batch_sizes[k] = plan.samples(k, opts.mc_samples);
    detail::parallel_for(groups * plan.count, opts.threads, [&](std::size_t job) {
      const std::size_t a = job / plan.count;
      const std::size_t k = job % plan.count;
      auto rng = make_stream(opts.seed, {4, static_cast<std::uint64_t>(t), a, k});
      std::normal_distribution<double> normal;
      Vector xi(q), z(q), y(q), out(q);
      Matrix acc = Matrix::Zero(q, q);
      for (std::size_t s = 0; s < batch_sizes[k]; ++s) {
        for (int i = 0; i < q; ++i) xi(i) = normal(rng);
        z.noalias() = root * xi;
        y.setZero();
        samplers[a](rng, std::span<double>(y.data(), q));
        g.value(std::span<const double>(z.data(), q), std::span<const double>(y.data(), q),
                static_cast<int>(a), t, std::span<double>(out.data(), q));
        acc.selfadjointView<Eigen::Lower>().rankUpdate(out);
      }
      acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();
      batch_means[job] = acc / static_cast<double>(batch_sizes[k]);
    });

    for (std::size_t a = 0; a < groups; ++a) {
      std::vector<Matrix> means(batch_means.begin() + a * plan.count,
                                batch_means.begin() + (a + 1) * plan.count);
      Matrix mean, se;
      fold_batches(means, batch_sizes, mean, se);
      if (!mean.allFinite()) {
        std::ostringstream os;
        os << "general SE: non-finite second moment for group " << a << " at t = " << t;
        throw DivergenceError(os.str(), t);
      }
      st.sigma_hat.push_back(std::move(mean));
      st.sigma_hat_stderr.push_back(std::move(se));
    }
    prev = st.sigma_hat;
    states.push_back(std::move(st));
  }
  return states;
}

McEstimate gaussian_side_expectation(
    const Matrix& sigma, const SideInfoSampler& sampler,
    const std::function<double(std::span<const double>, std::span<const double>)>& psi,
    const GeneralSeOptions& opts) {
  const int q = static_cast<int>(sigma.rows());
  const Matrix root = psd_sqrt(sigma);
  const BatchPlan plan = plan_batches(opts);
  std::vector<double> means(plan.count);
  std::vector<std::size_t> sizes(plan.count);
  for (std::size_t k = 0; k < plan.count; ++k) sizes[k] = plan.samples(k, opts.mc_samples);
  detail::parallel_for(plan.count, opts.threads, [&](std::size_t k) {
    auto rng = make_stream(opts.seed, {5, k});
    std::normal_distribution<double> normal;
    Vector xi(q), z(q), y(q);
    double acc = 0.0;
    for (std::size_t s = 0; s < sizes[k]; ++s) {
      for (int i = 0; i < q; ++i) xi(i) = normal(rng);
      z.noalias() = root * xi;
      y.setZero();
      sampler(rng, std::span<double>(y.data(), q));
      acc += psi(std::span<const double>(z.data(), q), std::span<const double>(y.data(), q));
    }
    means[k] = acc / static_cast<double>(sizes[k]);
  });
  McEstimate est;
  fold_batches(means, sizes, est.mean, est.std_error);
  return est;
}

}  // namespace ampse
