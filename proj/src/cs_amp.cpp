#include "ampse/amp.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ampse/csv.hpp"
#include "ampse/error.hpp"

namespace ampse {

Matrix compute_q(const CouplingMatrix& w, const Vector& phi) {
  if (phi.size() != w.rows()) throw InvalidArgument("compute_q: phi must have one entry per row group");
  for (int r = 0; r < phi.size(); ++r) {
    if (!(phi(r) > 0.0) || !std::isfinite(phi(r))) {
      std::ostringstream os;
      os << "compute_q: phi_" << r << " = " << phi(r) << " is not positive and finite";
      throw InvalidArgument(os.str());
    }
  }
  const Vector inv = phi.cwiseInverse();
  const Vector denom = w.entries().transpose() * inv;
  Matrix q(w.rows(), w.cols());
  for (int u = 0; u < w.cols(); ++u) {
    if (!(denom(u) > 0.0)) throw Error("compute_q: zero denominator in column " + std::to_string(u));
    q.col(u) = inv / denom(u);
  }
  return q;
}

Matrix schedule_q(const SeSchedule& schedule, int t) {
  const auto& w = schedule.coupling;
  if (t == 0) {
    const Vector colsum = w.entries().colwise().sum().transpose();
    Matrix q(w.rows(), w.cols());
    for (int u = 0; u < w.cols(); ++u) q.col(u).setConstant(1.0 / colsum(u));
    return q;
  }
  return compute_q(w, schedule.phi_at(t));
}

Vector compute_onsager(const CouplingMatrix& w, const Matrix& q_prev, const Vector& eta_prime_avgs,
                       double delta) {
  if (q_prev.rows() != w.rows() || q_prev.cols() != w.cols()) {
    throw InvalidArgument("compute_onsager: Q shape does not match W");
  }
  if (eta_prime_avgs.size() != w.cols()) {
    throw InvalidArgument("compute_onsager: need one derivative average per column group");
  }
  if (!(delta > 0.0)) throw InvalidArgument("compute_onsager: delta must be positive");
  return w.entries().cwiseProduct(q_prev) * eta_prime_avgs / delta;
}

namespace {

struct Block {
  int r;
  int c;
};

std::vector<Block> support(const CouplingMatrix& w) {
  std::vector<Block> out;
  for (int r = 0; r < w.rows(); ++r)
    for (int c = 0; c < w.cols(); ++c)
      if (w(r, c) != 0.0) out.push_back({r, c});
  return out;
}

void check_finite(const Vector& v, double limit, const char* what, int t) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || std::abs(v(i)) > limit) {
      std::ostringstream os;
      os << "CS AMP diverged at t = " << t << ": " << what << "[" << i << "] = " << v(i);
      throw DivergenceError(os.str(), t);
    }
  }
}

Vector block_errors(const Vector& est, const Vector& truth, int lc, int n0) {
  Vector out(lc);
  for (int u = 0; u < lc; ++u)
    out(u) = (est.segment(u * n0, n0) - truth.segment(u * n0, n0)).squaredNorm() / n0;
  return out;
}

}  // namespace

CsAmpTrace cs_amp_run(const SensingMatrix& a, const Vector& y, const SeSchedule& schedule,
                      int iterations, const std::optional<Vector>& truth, const CsAmpOptions& opts) {
  const EnsembleSpec& spec = a.spec;
  const int m = spec.m(), n = spec.n(), m0 = spec.m0, n0 = spec.n0;
  const int lr = spec.lr(), lc = spec.lc();
  if (iterations < 1) throw InvalidArgument("cs_amp_run: need at least one iteration");
  if (a.values.rows() != m || a.values.cols() != n) throw InvalidArgument("cs_amp_run: matrix shape does not match its ensemble");
  if (y.size() != m) throw InvalidArgument("cs_amp_run: y must have m entries");
  if (truth && truth->size() != n) throw InvalidArgument("cs_amp_run: truth must have n entries");
  if (!(schedule.coupling == spec.coupling)) throw InvalidArgument("cs_amp_run: schedule coupling differs from the ensemble");
  if (std::abs(schedule.delta - spec.delta()) > 1e-12 * spec.delta()) {
    throw InvalidArgument("cs_amp_run: schedule delta differs from m0/n0");
  }

  const auto blocks = support(spec.coupling);
  const Matrix& A = a.values;
  const Prior& prior = schedule.prior;

  CsAmpTrace tr;
  Vector x = Vector::Constant(n, prior.mean());
  Vector r_prev = Vector::Zero(m);
  Matrix q_prev = schedule_q(schedule, 0);
  Vector etap_prev = Vector::Zero(lc);
  if (truth) {
    tr.block_mse.resize(iterations + 1, lc);
    tr.block_mse.row(0) = block_errors(x, *truth, lc, n0).transpose();
  }
  tr.estimates.push_back(x);

  for (int t = 1; t <= iterations; ++t) {
    // r^0 = 0, so the first step carries no memory term.
    const Vector b = t == 1 ? Vector::Zero(lr)
                            : compute_onsager(spec.coupling, q_prev, etap_prev, schedule.delta);
    Vector r = y;
    for (const auto& [br, bc] : blocks)
      r.segment(br * m0, m0).noalias() -= A.block(br * m0, bc * n0, m0, n0) * x.segment(bc * n0, n0);
    for (int g = 0; g < lr; ++g) r.segment(g * m0, m0) += b(g) * r_prev.segment(g * m0, m0);
    check_finite(r, opts.divergence_limit, "r", t);

    const Matrix q = schedule_q(schedule, t);
    Vector pseudo = x;
    for (const auto& [br, bc] : blocks) {
      pseudo.segment(bc * n0, n0).noalias() +=
          q(br, bc) * (A.block(br * m0, bc * n0, m0, n0).transpose() * r.segment(br * m0, m0));
    }
    check_finite(pseudo, opts.divergence_limit, "pseudo-data", t);

    const Vector snr = schedule.snr(t);
    Vector next(n);
    Vector etap = Vector::Zero(lc);
    for (int j = 0; j < n; ++j) {
      const int u = j / n0;
      const PosteriorStats st = denoise(prior, pseudo(j), snr(u));
      next(j) = st.mean;
      etap(u) += st.mean_derivative;
    }
    etap /= n0;
    check_finite(next, opts.divergence_limit, "x", t + 1);

    tr.residuals.push_back(r);
    tr.pseudo_data.push_back(pseudo);
    tr.onsager.push_back(b);
    tr.q.push_back(q);
    tr.eta_prime_avgs.push_back(etap);
    tr.estimates.push_back(next);
    if (truth) tr.block_mse.row(t) = block_errors(next, *truth, lc, n0).transpose();

    x = std::move(next);
    r_prev = std::move(r);
    q_prev = q;
    etap_prev = etap;
  }
  return tr;
}

Matrix predicted_mse_table(const SeSchedule& schedule, int iterations) {
  const int lc = schedule.coupling.cols();
  Matrix out(iterations + 1, lc);
  for (int t = 1; t <= iterations + 1; ++t)
    for (int u = 0; u < lc; ++u) out(t - 1, u) = predicted_block_mse(schedule, u, t);
  return out;
}

void write_trace_csv(std::ostream& os, const std::string& run_id, std::uint64_t seed,
                     const CsAmpTrace& trace, const Matrix& predicted, bool header) {
  if (header) os << "run_id,seed,t,block,mse_empirical,mse_predicted,onsager_norm\n";
  const int rows = static_cast<int>(trace.estimates.size());
  const int lc = trace.block_mse.size() ? static_cast<int>(trace.block_mse.cols())
                                        : static_cast<int>(predicted.cols());
  for (int t = 1; t <= rows; ++t) {
    const double ons = t <= static_cast<int>(trace.onsager.size()) ? trace.onsager[t - 1].norm()
                                                                    : std::nan("");
    for (int u = 0; u < lc; ++u) {
      const double emp = trace.block_mse.size() ? trace.block_mse(t - 1, u) : std::nan("");
      const double pred = t - 1 < predicted.rows() ? predicted(t - 1, u) : std::nan("");
      os << run_id << ',' << seed << ',' << t << ',' << u << ',' << format_double(emp) << ','
         << format_double(pred) << ',' << format_double(ons) << '\n';
    }
  }
}

}  // namespace ampse
