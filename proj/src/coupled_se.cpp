#include "ampse/se.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ampse/csv.hpp"
#include "ampse/error.hpp"

namespace ampse {

const Vector& SeSchedule::phi_at(int t) const {
  if (t < 0) throw InvalidArgument("schedule: negative iteration");
  return t <= last() ? phi[t] : phi.back();
}

const Vector& SeSchedule::psi_at(int t) const {
  if (t < 0) throw InvalidArgument("schedule: negative iteration");
  return t < static_cast<int>(psi.size()) ? psi[t] : psi.back();
}

Vector SeSchedule::snr(int t) const {
  if (t == 0) return Vector::Zero(coupling.cols());
  return coupling.entries().transpose() * phi_at(t).cwiseInverse();
}

SeSchedule coupled_se_run(const CouplingMatrix& w, double delta, double noise_var,
                          const Prior& prior, int iterations, const CoupledSeOptions& opts) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("coupled SE: delta must be positive");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw InvalidArgument("coupled SE: noise variance must be nonnegative");
  }
  if (iterations < 1) throw InvalidArgument("coupled SE: need at least one iteration");
  prior.validate();

  constexpr double kInf = std::numeric_limits<double>::infinity();
  SeSchedule s{w, prior, delta, noise_var, {}, {}, false, {}, opts.mmse};
  const int lr = w.rows();
  const int lc = w.cols();
  s.phi.push_back(Vector::Constant(lr, kInf));
  s.psi.push_back(Vector::Constant(lc, kInf));
  // phi(0) = inf makes every effective snr zero, so psi(1) = mmse(0) = Var(X).
  s.psi.push_back(Vector::Constant(lc, variance(prior)));

  for (int t = 1; t <= iterations; ++t) {
    Vector phi = Vector::Constant(lr, noise_var) + (w.entries() * s.psi[t]) / delta;
    for (int a = 0; a < lr; ++a) {
      if (phi(a) < opts.phi_floor) {
        std::ostringstream os;
        os << "phi_" << a << "(" << t << ") = " << phi(a) << " floored at " << opts.phi_floor;
        s.warnings.push_back(os.str());
        phi(a) = opts.phi_floor;
      }
    }
    s.phi.push_back(phi);
    const Vector snr = w.entries().transpose() * phi.cwiseInverse();
    Vector next(lc);
    for (int u = 0; u < lc; ++u) next(u) = mmse(prior, snr(u), opts.mmse);
    const double change = (next - s.psi[t]).cwiseAbs().maxCoeff();
    s.psi.push_back(std::move(next));
    if (opts.stop_tol > 0.0 && change < opts.stop_tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

double predicted_block_mse(const SeSchedule& schedule, int block, int t) {
  if (t < 1) throw InvalidArgument("predicted_block_mse: t must be at least 1");
  if (block < 0 || block >= schedule.coupling.cols()) {
    throw InvalidArgument("predicted_block_mse: block out of range");
  }
  return mmse(schedule.prior, schedule.snr(t - 1)(block), schedule.mmse_options);
}

void write_schedule_csv(std::ostream& os, const SeSchedule& schedule) {
  os << "t,kind,index,value\n";
  for (std::size_t t = 0; t < schedule.phi.size(); ++t) {
    for (int a = 0; a < schedule.phi[t].size(); ++a) {
      os << t << ",phi," << a << ',' << format_double(schedule.phi[t](a)) << '\n';
    }
  }
  for (std::size_t t = 0; t < schedule.psi.size(); ++t) {
    for (int i = 0; i < schedule.psi[t].size(); ++i) {
      os << t << ",psi," << i << ',' << format_double(schedule.psi[t](i)) << '\n';
    }
  }
}

}  // namespace ampse
