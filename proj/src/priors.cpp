#include "ampse/priors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "ampse/error.hpp"
#include "ampse/quadrature.hpp"
#include "ampse/random.hpp"

namespace ampse {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr int kMmseDoublings = 2;

double log_normal_pdf(double y, double center, double var) {
  const double d = y - center;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// One mixture component seen through the channel y = x + sqrt(tau) z.
struct ObservedComponent {
  double log_weight;
  double center;
  double obs_var;     // variance of y under this component
  double prior_var;   // 0 for atoms
  double prior_mean;
  double tau;

  double post_mean(double y) const {
    if (prior_var == 0.0) return prior_mean;
    return (prior_var * y + tau * prior_mean) / (prior_var + tau);
  }
  double post_var() const {
    if (prior_var == 0.0) return 0.0;
    return prior_var * tau / (prior_var + tau);
  }
  double log_density(double y) const { return log_normal_pdf(y, center, obs_var); }
};

std::vector<ObservedComponent> observe(const Prior& prior, double tau) {
  std::vector<ObservedComponent> out;
  out.reserve(prior.atoms.size() + prior.gaussians.size());
  for (const auto& a : prior.atoms) {
    if (a.weight <= 0.0) continue;
    out.push_back({std::log(a.weight), a.value, tau, 0.0, a.value, tau});
  }
  for (const auto& g : prior.gaussians) {
    if (g.weight <= 0.0) continue;
    out.push_back({std::log(g.weight), g.mean, g.variance + tau, g.variance, g.mean, tau});
  }
  return out;
}

double log_marginal(const std::vector<ObservedComponent>& comps, double y) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) top = std::max(top, c.log_weight + c.log_density(y));
  double acc = 0.0;
  for (const auto& c : comps) acc += std::exp(c.log_weight + c.log_density(y) - top);
  return top + std::log(acc);
}

double mmse_with_rule(const std::vector<ObservedComponent>& comps, const HermiteRule& rule) {
  double total = 0.0;
  for (const auto& c : comps) total += std::exp(c.log_weight) * c.post_var();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const auto& narrow = comps[i].obs_var <= comps[j].obs_var ? comps[i] : comps[j];
      const auto& other = comps[i].obs_var <= comps[j].obs_var ? comps[j] : comps[i];
      const double lw = narrow.log_weight + other.log_weight;
      total += gaussian_expectation(rule, narrow.center, narrow.obs_var, [&](double y) {
        const double ratio = std::exp(lw + other.log_density(y) - log_marginal(comps, y));
        const double d = narrow.post_mean(y) - other.post_mean(y);
        return ratio * d * d;
      });
    }
  }
  return total;
}

// int p(y) Var(X | y) dy by adaptive Gauss-Kronrod, split at every component's
// centre and +-1, 4 standard deviations. Returns nullopt above tolerance.
std::optional<double> mmse_adaptive(const std::vector<ObservedComponent>& comps, double rel_tol, double abs_tol) {
  std::vector<double> cuts;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : comps) {
    const double sd = std::sqrt(c.obs_var);
    for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0}) cuts.push_back(c.center + k * sd);
    lo = std::min(lo, c.center - 14.0 * sd);
    hi = std::max(hi, c.center + 14.0 * sd);
  }
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::ranges::sort(cuts);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> resp(comps.size());
  auto integrand = [&](double y) {
    const double lp = log_marginal(comps, y);
    double mean = 0.0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      resp[c] = std::exp(comps[c].log_weight + comps[c].log_density(y) - lp);
      mean += resp[c] * comps[c].post_mean(y);
    }
    double var = 0.0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const double d = comps[c].post_mean(y) - mean;
      var += resp[c] * (comps[c].post_var() + d * d);
    }
    return std::exp(lp) * var;
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0, error = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(integrand, cuts[k], cuts[k + 1], 20, 1e-13, &err);
    error += err;
  }
  if (!(error <= rel_tol * std::abs(total) + abs_tol)) return std::nullopt;
  return total;
}

}  // namespace

Prior Prior::gaussian(double mean, double variance) {
  Prior p;
  p.gaussians.push_back({1.0, mean, variance});
  p.validate();
  return p;
}

Prior Prior::bernoulli_gaussian(double eps, double mean, double variance) {
  Prior p;
  if (eps < 1.0) p.atoms.push_back({0.0, 1.0 - eps});
  if (eps > 0.0) p.gaussians.push_back({eps, mean, variance});
  p.validate();
  return p;
}

Prior Prior::discrete(std::vector<Atom> atoms) {
  Prior p;
  p.atoms = std::move(atoms);
  p.validate();
  return p;
}

void Prior::validate() const {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.weight) || a.weight < 0.0) {
      throw InvalidArgument("prior: atom weights must be finite and nonnegative");
    }
    total += a.weight;
  }
  for (const auto& g : gaussians) {
    if (!std::isfinite(g.weight) || g.weight < 0.0 || !std::isfinite(g.mean)) {
      throw InvalidArgument("prior: gaussian weights must be finite and nonnegative");
    }
    if (!(g.variance > 0.0) || !std::isfinite(g.variance)) {
      throw InvalidArgument("prior: gaussian component variance must be positive");
    }
    total += g.weight;
  }
  if (atoms.empty() && gaussians.empty()) throw InvalidArgument("prior: no components");
  if (std::abs(total - 1.0) > kWeightTol) {
    std::ostringstream os;
    os.precision(17);
    os << "prior: weights sum to " << total << ", expected 1";
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (atoms[i].value == atoms[j].value) throw InvalidArgument("prior: duplicate atom value");
    }
  }
}

double Prior::mean() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.weight * a.value;
  for (const auto& g : gaussians) m += g.weight * g.mean;
  return m;
}

double variance(const Prior& prior) {
  const double mu = prior.mean();
  double v = 0.0;
  for (const auto& a : prior.atoms) v += a.weight * (a.value - mu) * (a.value - mu);
  for (const auto& g : prior.gaussians) v += g.weight * (g.variance + (g.mean - mu) * (g.mean - mu));
  return v;
}

PosteriorStats denoise(const Prior& prior, double y, double snr) {
  if (!std::isfinite(y)) throw InvalidArgument("denoise: observation must be finite");
  if (!(snr >= 0.0) || !std::isfinite(snr)) {
    throw InvalidArgument("denoise: snr must be finite and nonnegative");
  }
  if (snr == 0.0) return {prior.mean(), variance(prior), 0.0};

  const auto comps = observe(prior, 1.0 / snr);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logl(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    logl[i] = comps[i].log_weight + comps[i].log_density(y);
    top = std::max(top, logl[i]);
  }
  double norm = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    logl[i] = std::exp(logl[i] - top);
    norm += logl[i];
    mean += logl[i] * comps[i].post_mean(y);
  }
  mean /= norm;
  double var = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double d = comps[i].post_mean(y) - mean;
    var += logl[i] * (comps[i].post_var() + d * d);
  }
  var /= norm;
  return {mean, var, snr * var};
}

double mmse(const Prior& prior, double snr, const MmseOptions& opts) {
  if (!(snr >= 0.0) || !std::isfinite(snr)) {
    throw InvalidArgument("mmse: snr must be finite and nonnegative");
  }
  if (opts.nodes < 1 || opts.nodes > 150) throw InvalidArgument("mmse: node count must lie in [1, 150]");
  const double var0 = variance(prior);
  if (snr == 0.0) return var0;

  // Successive doublings of the node count; converged once two neighbours agree.
  const auto comps = observe(prior, 1.0 / snr);
  int nodes = opts.nodes;
  double coarse = mmse_with_rule(comps, *hermite_rule(nodes));
  double fine = coarse;
  for (int round = 0; round < kMmseDoublings; ++round) {
    if (round > 0) coarse = fine;
    nodes *= 2;
    fine = mmse_with_rule(comps, *hermite_rule(nodes));
    if (std::abs(coarse - fine) <= opts.rel_tol * std::abs(fine) + opts.abs_tol * var0) {
      return std::clamp(fine, 0.0, var0);
    }
  }
  if (opts.adaptive_fallback) {
    if (const auto v = mmse_adaptive(comps, opts.rel_tol, opts.abs_tol * var0)) return std::clamp(*v, 0.0, var0);
  }
  std::ostringstream os;
  os.precision(17);
  os << "mmse: quadrature not converged at snr " << snr << " (" << nodes / 2
     << " nodes: " << coarse << ", " << nodes << " nodes: " << fine << ")";
  throw QuadratureError(os.str(), coarse, fine);
}

std::vector<double> sample(const Prior& prior, std::size_t count, std::uint64_t seed) {
  std::vector<double> weights;
  for (const auto& a : prior.atoms) weights.push_back(a.weight);
  for (const auto& g : prior.gaussians) weights.push_back(g.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;
  auto rng = make_stream(seed, {0x5052494fULL});
  std::vector<double> out(count);
  for (auto& x : out) {
    const std::size_t k = pick(rng);
    if (k < prior.atoms.size()) {
      x = prior.atoms[k].value;
    } else {
      const auto& g = prior.gaussians[k - prior.atoms.size()];
      x = g.mean + std::sqrt(g.variance) * normal(rng);
    }
  }
  return out;
}

double renyi_upper_dimension(const Prior& prior) {
  double w = 0.0;
  for (const auto& g : prior.gaussians) w += g.weight;
  return w;
}

void to_json(nlohmann::json& j, const Prior& p) {
  auto atoms = nlohmann::json::array();
  for (const auto& a : p.atoms) atoms.push_back({a.value, a.weight});
  auto gaussians = nlohmann::json::array();
  for (const auto& g : p.gaussians) gaussians.push_back({g.weight, g.mean, g.variance});
  j = nlohmann::json{{"atoms", atoms}, {"gaussians", gaussians}};
}

void from_json(const nlohmann::json& j, Prior& p) {
  p = Prior{};
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw InvalidArgument("prior: atom must be [value, weight]");
      p.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  }
  if (j.contains("gaussians")) {
    for (const auto& g : j.at("gaussians")) {
      if (!g.is_array() || g.size() != 3) {
        throw InvalidArgument("prior: gaussian must be [weight, mean, variance]");
      }
      p.gaussians.push_back({g[0].get<double>(), g[1].get<double>(), g[2].get<double>()});
    }
  }
  p.validate();
}

}  // namespace ampse
