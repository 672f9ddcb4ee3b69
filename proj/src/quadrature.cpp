#include "ampse/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "ampse/error.hpp"

namespace ampse {

namespace {

// Orthonormal Hermite functions psi_k(x) = p_k(x) exp(-x^2 / 2); returns
// (psi_{n-1}, psi_n) and the sum of psi_k^2 for k < n. The exp factor keeps the
// recurrence in range where the raw polynomials overflow.
struct HermiteEval {
  double prev;
  double last;
  double sum_sq;
};

HermiteEval hermite_functions(int n, double x) {
  constexpr double kPiM4 = 0.7511255444649425;  // pi^{-1/4}
  double p_prev = 0.0;
  double p = kPiM4 * std::exp(-0.5 * x * x);
  double sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    sum_sq += p * p;
    const double next = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(static_cast<double>(k) / (k + 1)) * p_prev;
    p_prev = p;
    p = next;
  }
  return {p_prev, p, sum_sq};
}

}  // namespace

HermiteRule compute_hermite_rule(int n) {
  if (n < 1) throw InvalidArgument("hermite rule: node count must be positive");
  if (n > 600) throw InvalidArgument("hermite rule: more than 600 nodes underflows the weights");
  // Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("hermite rule: eigenvalue solver failed");

  HermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = 0.5 * (es.eigenvalues()(n - 1 - i) - es.eigenvalues()(i));
    if (2 * i + 1 == n) z = 0.0;
    for (int it = 0; it < 3 && z != 0.0; ++it) {
      const auto h = hermite_functions(n, z);
      const double deriv = std::sqrt(2.0 * n) * h.prev - z * h.last;
      z -= h.last / deriv;
    }
    const double w = std::exp(-z * z) / hermite_functions(n, z).sum_sq;
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

std::shared_ptr<const HermiteRule> hermite_rule(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const HermiteRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const HermiteRule>(compute_hermite_rule(n));
  return slot;
}

}  // namespace ampse
