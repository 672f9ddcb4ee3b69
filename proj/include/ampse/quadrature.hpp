#pragma once

#include <cmath>
#include <memory>
#include <vector>

namespace ampse {

/// Gauss-Hermite rule for the weight exp(-x^2): sum_i w_i f(x_i) ~ int f(x) e^{-x^2} dx.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Computes the n-point rule (Golub-Welsch, then Newton polishing); n <= 600.
HermiteRule compute_hermite_rule(int n);

/// Cached rule; safe to call from any thread. The returned rule is immutable.
std::shared_ptr<const HermiteRule> hermite_rule(int n);

/// E f(mu + sqrt(var) Z), Z ~ N(0,1), with the given rule.
template <class F>
double gaussian_expectation(const HermiteRule& rule, double mu, double var, F&& f) {
  constexpr double kInvSqrtPi = 0.56418958354775628695;
  const double scale = std::sqrt(2.0 * var);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mu + scale * rule.nodes[i]);
  }
  return acc * kInvSqrtPi;
}

}  // namespace ampse
