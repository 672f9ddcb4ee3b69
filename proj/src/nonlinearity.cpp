#include "ampse/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ampse {

double jacobian_fd_error(const Nonlinearity& g, std::span<const double> x,
                         std::span<const double> y, int group, int t, double step) {
  const int q = g.dim;
  std::vector<double> jac(q * q), plus(q), minus(q), probe(x.begin(), x.end());
  g.jacobian(x, y, group, t, jac);
  double worst = 0.0;
  for (int c = 0; c < q; ++c) {
    const double h = step * std::max(1.0, std::abs(x[c]));
    probe[c] = x[c] + h;
    g.value(probe, y, group, t, plus);
    probe[c] = x[c] - h;
    g.value(probe, y, group, t, minus);
    probe[c] = x[c];
    for (int r = 0; r < q; ++r) {
      const double fd = (plus[r] - minus[r]) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - jac[r * q + c]));
    }
  }
  return worst;
}

Nonlinearity zero_nonlinearity(int q) {
  return {q,
          [](auto, auto, int, int, std::span<double> out) { std::ranges::fill(out, 0.0); },
          [](auto, auto, int, int, std::span<double> jac) { std::ranges::fill(jac, 0.0); }};
}

Nonlinearity identity_nonlinearity(int q) {
  return {q,
          [](std::span<const double> x, auto, int, int, std::span<double> out) {
            std::ranges::copy(x, out.begin());
          },
          [q](auto, auto, int, int, std::span<double> jac) {
            std::ranges::fill(jac, 0.0);
            for (int i = 0; i < q; ++i) jac[i * q + i] = 1.0;
          }};
}

}  // namespace ampse
