#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace ampse {

struct Atom {
  double value = 0.0;
  double weight = 0.0;
  bool operator==(const Atom&) const = default;
};

struct GaussianComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 1.0;
  bool operator==(const GaussianComponent&) const = default;
};

/// Scalar signal law: a mixture of point masses and Gaussians.
///
/// Weights must be nonnegative and sum to one; Gaussian variances must be
/// strictly positive; atom values must be distinct. Use validate() or the
/// factory functions, which validate on construction.
struct Prior {
  std::vector<Atom> atoms;
  std::vector<GaussianComponent> gaussians;

  static Prior gaussian(double mean, double variance);
  static Prior bernoulli_gaussian(double eps, double mean = 0.0, double variance = 1.0);
  static Prior discrete(std::vector<Atom> atoms);

  /// Throws InvalidArgument describing the first violated invariant.
  void validate() const;

  double mean() const;

  bool operator==(const Prior&) const = default;
};

/// Posterior summary for Y = X + snr^{-1/2} Z.
struct PosteriorStats {
  double mean = 0.0;
  double variance = 0.0;
  double mean_derivative = 0.0;  ///< d/dy E[X | Y=y] = snr * Var(X | Y=y)
};

double variance(const Prior& prior);

/// Posterior mean, variance and derivative of the conditional-expectation
/// denoiser. At snr = 0 returns the prior mean with zero derivative.
PosteriorStats denoise(const Prior& prior, double y, double snr);

struct MmseOptions {
  int nodes = 127;  ///< first rule; at most 150
  double rel_tol = 1e-6;
  /// Absolute slack, in units of Var(X).
  double abs_tol = 1e-8;
  /// When the Hermite rules disagree, integrate adaptively (Gauss-Kronrod on
  /// segments split at the component scales) before giving up.
  bool adaptive_fallback = true;
};

/// E[(X - E[X|Y])^2] for Y = sqrt(snr) X + Z.
///
/// Uses the mixture decomposition
///   mmse = sum_c w_c v_c + sum_{c<d} int w_c w_d N_c N_d / p * (m_c - m_d)^2 dy
/// with each pair term integrated by Gauss-Hermite in the variable of the
/// narrower of the two components, so that sharp components at high snr are
/// resolved. The node count is doubled (n, 2n, 4n) until two successive rules
/// agree within tolerance. A third component much narrower than a pair puts a
/// sharp dip into that pair's integrand, which no Hermite rule resolves; the
/// adaptive fallback handles it. QuadratureError carries the last Hermite pair.
double mmse(const Prior& prior, double snr, const MmseOptions& opts = {});

/// i.i.d. draws from the prior; deterministic in seed.
std::vector<double> sample(const Prior& prior, std::size_t count, std::uint64_t seed);

/// Weight of the absolutely continuous part.
double renyi_upper_dimension(const Prior& prior);

void to_json(nlohmann::json& j, const Prior& p);
void from_json(const nlohmann::json& j, Prior& p);

}  // namespace ampse
