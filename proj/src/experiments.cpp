#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "ampse/csv.hpp"
#include "ampse/error.hpp"
#include "ampse/harness.hpp"
#include "ampse/random.hpp"
#include "parallel.hpp"

namespace ampse {

namespace {

constexpr const char* kCsMcHeader = "config_hash,seed,t,block,mse_emp,mse_se,rel_err";

Report new_report(const ExperimentConfig& c) {
  Report r;
  r.kind = to_string(c.kind);
  r.config_hash = config_hash(c);
  return r;
}

void require_kind(const ExperimentConfig& c, ExperimentKind kind) {
  if (c.kind != kind) {
    throw InvalidArgument("experiment: expected kind " + to_string(kind) + ", got " + to_string(c.kind));
  }
}

std::string where(int t, int block) {
  return "t=" + std::to_string(t) + " block=" + std::to_string(block);
}

double rel_dev(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

// Sample standard deviation of columns of `samples` (one row per trial).
void mean_and_std(const std::vector<const Matrix*>& samples, Matrix& mean, Matrix& sd) {
  const Matrix& first = *samples.front();
  mean = Matrix::Zero(first.rows(), first.cols());
  sd = Matrix::Zero(first.rows(), first.cols());
  for (const Matrix* s : samples) mean += *s;
  mean /= static_cast<double>(samples.size());
  if (samples.size() < 2) return;
  for (const Matrix* s : samples) sd += (*s - mean).cwiseAbs2();
  sd = (sd / static_cast<double>(samples.size() - 1)).cwiseSqrt();
}

}  // namespace

// ---------------------------------------------------------------------------
// cs_mc
// ---------------------------------------------------------------------------

CsMcResult run_cs_monte_carlo(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::cs_mc);
  validate_config(c);
  const EnsembleSpec spec = c.ensemble();
  const int T = c.iterations;

  CsMcResult out;
  out.report = new_report(c);
  CoupledSeOptions se_opts;
  se_opts.stop_tol = 0.0;
  out.predicted =
      predicted_mse_table(coupled_se_run(spec.coupling, spec.delta(), c.noise_var, c.prior, T, se_opts), T);

  out.trials.resize(c.trials);
  detail::parallel_for(out.trials.size(), c.threads, [&](std::size_t k) {
    TrialResult& tr = out.trials[k];
    tr.seed = c.trial_seed(static_cast<int>(k));
    const auto start = std::chrono::steady_clock::now();
    try {
      const CsInstance cs = make_cs_instance(spec, c.prior, c.noise_var, T, tr.seed);
      const CsAmpTrace trace = cs_amp_run(cs.a, cs.y, cs.schedule, T, cs.x);
      tr.mse_emp = trace.block_mse;
      tr.mse_se = predicted_mse_table(cs.schedule, T);
      tr.ok = true;
    } catch (const Error& e) {
      tr.error = e.what();
    }
    tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  std::vector<const Matrix*> good;
  bool invariant = true;
  for (const auto& tr : out.trials) {
    if (!tr.ok) {
      out.report.failures.push_back("seed " + std::to_string(tr.seed) + ": " + tr.error);
      continue;
    }
    good.push_back(&tr.mse_emp);
    invariant = invariant && tr.mse_se == out.predicted;
  }
  out.report.add("successful_trials", static_cast<double>(good.size()), c.trials,
                 static_cast<int>(good.size()) == c.trials);
  out.report.add("se_trial_invariant", invariant ? 0.0 : 1.0, 0.0, invariant);
  if (good.empty()) return out;

  mean_and_std(good, out.mean, out.stddev);
  const auto& tol = c.tolerances;
  for (int t = 0; t < out.mean.rows(); ++t) {
    for (int b = 0; b < out.mean.cols(); ++b) {
      const double se = out.predicted(t, b);
      const double limit = std::max(tol.mc_rel * se, tol.mc_sigmas * out.stddev(t, b));
      const double gap = std::abs(out.mean(t, b) - se);
      out.report.add("mse " + where(t + 1, b), gap, limit, gap <= limit);
    }
  }
  return out;
}

void write_cs_mc_csv(std::ostream& os, const ExperimentConfig& c, const CsMcResult& r) {
  const std::string hash = config_hash(c);
  os << kCsMcHeader << '\n';
  for (const auto& tr : r.trials) {
    if (!tr.ok) continue;
    for (int t = 0; t < tr.mse_emp.rows(); ++t) {
      for (int b = 0; b < tr.mse_emp.cols(); ++b) {
        const double emp = tr.mse_emp(t, b), se = tr.mse_se(t, b);
        os << hash << ',' << tr.seed << ',' << t + 1 << ',' << b << ',' << format_double(emp) << ','
           << format_double(se) << ',' << format_double((emp - se) / se) << '\n';
      }
    }
  }
}

void write_cs_mc_summary_csv(std::ostream& os, const ExperimentConfig& c, const CsMcResult& r) {
  const std::string hash = config_hash(c);
  os << "config_hash,t,block,mse_mean,mse_std,mse_se,limit,pass\n";
  if (r.mean.size() == 0) return;
  const auto& tol = c.tolerances;
  for (int t = 0; t < r.mean.rows(); ++t) {
    for (int b = 0; b < r.mean.cols(); ++b) {
      const double se = r.predicted(t, b);
      const double limit = std::max(tol.mc_rel * se, tol.mc_sigmas * r.stddev(t, b));
      os << hash << ',' << t + 1 << ',' << b << ',' << format_double(r.mean(t, b)) << ','
         << format_double(r.stddev(t, b)) << ',' << format_double(se) << ',' << format_double(limit) << ','
         << (std::abs(r.mean(t, b) - se) <= limit ? 1 : 0) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// se_only
// ---------------------------------------------------------------------------

SeOnlyResult run_se_only(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::se_only);
  validate_config(c);
  CoupledSeOptions opts;
  opts.stop_tol = 0.0;
  SeOnlyResult out{coupled_se_run(c.coupling.build(), c.delta(), c.noise_var, c.prior, c.iterations, opts),
                   new_report(c)};
  double rise = 0.0;
  bool finite = true;
  for (std::size_t t = 1; t < out.schedule.psi.size(); ++t) {
    finite = finite && out.schedule.psi[t].allFinite();
    if (t >= 2) rise = std::max(rise, (out.schedule.psi[t] - out.schedule.psi[t - 1]).maxCoeff());
  }
  out.report.add("psi_finite", finite ? 0.0 : 1.0, 0.0, finite);
  const double slack = 1e-12 * variance(c.prior);
  out.report.add("psi_nonincreasing", rise, slack, rise <= slack);
  return out;
}

void write_se_csv(std::ostream& os, const ExperimentConfig& c, const SeOnlyResult& r) {
  const std::string hash = config_hash(c);
  os << "config_hash,t,kind,index,value\n";
  const auto& s = r.schedule;
  for (std::size_t t = 0; t < s.phi.size(); ++t)
    for (int a = 0; a < s.phi[t].size(); ++a)
      os << hash << ',' << t << ",phi," << a << ',' << format_double(s.phi[t](a)) << '\n';
  for (std::size_t t = 0; t < s.psi.size(); ++t)
    for (int a = 0; a < s.psi[t].size(); ++a)
      os << hash << ',' << t << ",psi," << a << ',' << format_double(s.psi[t](a)) << '\n';
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::pair<double, int> converged_max_mse(const ExperimentConfig& c, double delta) {
  CoupledSeOptions opts;
  opts.stop_tol = c.sweep.stop_tol;
  const SeSchedule s = coupled_se_run(c.coupling.build(), delta, c.noise_var, c.prior, c.sweep.max_iterations, opts);
  return {s.psi.back().maxCoeff(), s.last()};
}

SweepResult run_delta_sweep(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::sweep);
  validate_config(c);
  const SweepConfig& sw = c.sweep;
  SweepResult out;
  out.report = new_report(c);

  std::vector<std::pair<double, int>> grid(sw.deltas.size());
  detail::parallel_for(grid.size(), c.threads, [&](std::size_t k) { grid[k] = converged_max_mse(c, sw.deltas[k]); });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.points.push_back({sw.deltas[k], "se_max_mse", grid[k].first});
    out.points.push_back({sw.deltas[k], "se_iterations", static_cast<double>(grid[k].second)});
  }

  if (sw.require_decreasing && !grid.empty()) {
    std::vector<std::size_t> order(grid.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::ranges::sort(order, {}, [&](std::size_t k) { return sw.deltas[k]; });
    double worst = -std::numeric_limits<double>::infinity();
    bool positive = true;
    for (std::size_t k = 0; k < order.size(); ++k) {
      positive = positive && grid[order[k]].first > 0.0;
      if (k > 0) worst = std::max(worst, grid[order[k]].first - grid[order[k - 1]].first);
    }
    out.report.add("se_positive", positive ? 1.0 : 0.0, 1.0, positive);
    if (order.size() > 1) out.report.add("se_decreasing", worst, 0.0, worst < 0.0, "largest step increase");
  }

  if (sw.bisect) {
    double lo = sw.lo, hi = sw.hi;
    const double f_lo = converged_max_mse(c, lo).first;
    const double f_hi = converged_max_mse(c, hi).first;
    const bool bracket = f_lo >= sw.threshold && f_hi < sw.threshold;
    out.report.add("bisection_bracket", bracket ? 1.0 : 0.0, 1.0, bracket,
                   "mse(lo)=" + format_double(f_lo) + " mse(hi)=" + format_double(f_hi));
    if (bracket) {
      double f_at = f_hi;
      for (int k = 0; k < sw.steps; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double f = converged_max_mse(c, mid).first;
        if (f < sw.threshold) {
          hi = mid;
          f_at = f;
        } else {
          lo = mid;
        }
      }
      out.critical_delta = hi;
      out.points.push_back({hi, "critical_delta", f_at});
      out.points.push_back({lo, "critical_lower", converged_max_mse(c, lo).first});
    }
    if (sw.critical_min) {
      const double v = out.critical_delta.value_or(std::numeric_limits<double>::quiet_NaN());
      out.report.add("critical_min", v, *sw.critical_min, out.critical_delta && v >= *sw.critical_min);
    }
    if (sw.critical_max) {
      const double v = out.critical_delta.value_or(std::numeric_limits<double>::quiet_NaN());
      out.report.add("critical_max", v, *sw.critical_max, out.critical_delta && v <= *sw.critical_max);
    }
  }

  for (double d : sw.mc_deltas) {
    ExperimentConfig mc = c;
    mc.kind = ExperimentKind::cs_mc;
    mc.m0 = std::max(1, static_cast<int>(std::lround(d * c.n0)));
    const CsMcResult r = run_cs_monte_carlo(mc);
    if (r.mean.size() == 0) {
      out.report.failures.push_back("mc at delta " + format_double(d) + " had no successful trials");
      continue;
    }
    out.points.push_back({mc.delta(), "mc_max_mse", r.mean.row(r.mean.rows() - 1).maxCoeff()});
    out.points.push_back({mc.delta(), "mc_se_max_mse", r.predicted.row(r.predicted.rows() - 1).maxCoeff()});
    int failed = 0;
    for (const auto& g : r.report.gates) failed += g.pass ? 0 : 1;
    out.report.add("mc_confirmation delta=" + format_double(mc.delta()), failed, 0.0, failed == 0,
                   "failing cs_mc gates");
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const ExperimentConfig& c, const SweepResult& r) {
  const std::string hash = config_hash(c);
  os << "config_hash,kind,delta,value\n";
  for (const auto& p : r.points)
    os << hash << ',' << p.kind << ',' << format_double(p.delta) << ',' << format_double(p.value) << '\n';
}

// ---------------------------------------------------------------------------
// embed_check
// ---------------------------------------------------------------------------

namespace {

struct DeviationTracker {
  double tol = 0.0;
  double max = 0.0;
  std::string worst;
  std::optional<std::string> first_offending;
  std::vector<std::tuple<std::string, int, double>> rows;

  // Relative deviation of got against want over all entries.
  void compare(const std::string& identity, int t, const Eigen::Ref<const Matrix>& got,
               const Eigen::Ref<const Matrix>& want) {
    double step_max = 0.0;
    for (int i = 0; i < got.rows(); ++i) {
      for (int k = 0; k < got.cols(); ++k) {
        const double d = rel_dev(got(i, k), want(i, k));
        const std::string at = identity + " i=" + std::to_string(i) + " t=" + std::to_string(t);
        if (!(d <= tol) && !first_offending) first_offending = at;
        if (!(d <= max)) {
          max = d;
          worst = at;
        }
        step_max = std::max(step_max, d);
      }
    }
    rows.emplace_back(identity, t, step_max);
  }
};

}  // namespace

EmbedCheckResult run_embed_check(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::embed_check);
  validate_config(c);
  const EnsembleSpec spec = c.ensemble();
  const int T = c.iterations, m = spec.m(), n = spec.n();
  const std::uint64_t seed = c.base_seed;
  const CsInstance cs = make_cs_instance(spec, c.prior, c.noise_var, T, seed);
  BipartiteInstance bip = build_bipartite(cs, seed, T);
  SymmetricInstance sym = build_embedding(cs, seed, T);
  DeviationTracker dev;
  dev.tol = c.tolerances.embed;

  if (c.embed.degenerate) {
    const int q = bip.e.dim;
    bip.e = zero_nonlinearity(q);
    bip.h = zero_nonlinearity(q);
    sym.nonlinearity = zero_nonlinearity(q);
    const BipartiteTrace bt = bipartite_amp_run(bip, T);
    const OrbitTrace st = symmetric_amp_run(sym, 2 * T);
    for (int t = 1; t <= T; ++t) {
      dev.compare("null_u", t, bt.u[t - 1], Matrix::Zero(m, q));
      dev.compare("null_v", t + 1, bt.v[t], Matrix::Zero(n, q));
    }
    for (int t = 1; t <= 2 * T; ++t) dev.compare("null_sym", t, st.states[t], Matrix::Zero(m + n, q));
  } else {
    const CsAmpTrace tr = cs_amp_run(cs.a, cs.y, cs.schedule, T);
    const ChangeOfVariables cv = change_of_variables(cs, tr);
    const BipartiteTrace bt = bipartite_amp_run(bip, T);
    const OrbitTrace st = symmetric_amp_run(sym, 2 * T);
    Vector u(m), v(n);
    for (int j = 0; j < n; ++j) v(j) = bt.v[0](j, spec.col_group(j));
    dev.compare("prop_v", 1, v, cv.x_tilde[0]);
    for (int t = 1; t <= T; ++t) {
      for (int i = 0; i < m; ++i) u(i) = bt.u[t - 1](i, spec.row_group(i));
      for (int j = 0; j < n; ++j) v(j) = bt.v[t](j, spec.col_group(j));
      dev.compare("prop_u", t, u, cv.r_tilde[t - 1]);
      dev.compare("prop_v", t + 1, v, cv.x_tilde[t]);
    }
    for (int t = 0; t <= T; ++t) {
      dev.compare("sym_v", 2 * t, st.states[2 * t].bottomRows(n), bt.v[t]);
      if (t < T) dev.compare("sym_u", 2 * t + 1, st.states[2 * t + 1].topRows(m), bt.u[t]);
    }
  }

  EmbedCheckResult out;
  out.max_deviation = dev.max;
  out.worst = dev.worst;
  out.first_offending = dev.first_offending;
  out.report = new_report(c);
  out.report.add("max_relative_deviation", dev.max, c.tolerances.embed, !dev.first_offending,
                 dev.first_offending ? "first offending " + *dev.first_offending : "worst " + dev.worst);
  for (auto& [identity, t, d] : dev.rows) out.rows.push_back({std::move(identity), t, d});
  return out;
}

void write_embed_csv(std::ostream& os, const ExperimentConfig& c, const EmbedCheckResult& r) {
  const std::string hash = config_hash(c);
  os << "config_hash,identity,t,max_deviation\n";
  for (const auto& row : r.rows)
    os << hash << ',' << row.identity << ',' << row.t << ',' << format_double(row.max_deviation) << '\n';
}

// ---------------------------------------------------------------------------
// general_se_check
// ---------------------------------------------------------------------------

namespace {

SideInfoSampler make_sampler(const SideInfoSpec& s) {
  if (s.kind == "gaussian") {
    const double sd = std::sqrt(s.variance);
    return [sd](Engine& rng, std::span<double> y) { y[0] = sd * std::normal_distribution<double>()(rng); };
  }
  if (s.kind == "rademacher") {
    return [](Engine& rng, std::span<double> y) { y[0] = (rng() & 1u) ? 1.0 : -1.0; };
  }
  return [](Engine&, std::span<double> y) { y[0] = 0.0; };
}

Nonlinearity make_family(const ScalarFamilySpec& f) {
  if (f.kind == "identity") return identity_nonlinearity(1);
  const double gain = f.gain, side = f.side;
  return {1,
          [gain, side](std::span<const double> x, std::span<const double> y, int, int, std::span<double> out) {
            out[0] = std::tanh(gain * x[0]) + side * y[0];
          },
          [gain](std::span<const double> x, std::span<const double>, int, int, std::span<double> jac) {
            const double th = std::tanh(gain * x[0]);
            jac[0] = gain * (1.0 - th * th);
          }};
}

double test_function(const std::string& name, double x) {
  if (name == "x") return x;
  if (name == "x2") return x * x;
  return std::abs(x);
}

// E psi(Z) for Z ~ N(0, sigma2).
double gaussian_expectation(const std::string& name, double sigma2) {
  if (name == "x") return 0.0;
  if (name == "x2") return sigma2;
  return std::sqrt(2.0 * sigma2 / std::numbers::pi);
}

std::vector<int> group_sizes(int n, const std::vector<double>& fractions) {
  std::vector<int> sizes;
  int used = 0;
  for (std::size_t a = 0; a + 1 < fractions.size(); ++a) {
    sizes.push_back(static_cast<int>(std::lround(fractions[a] * n)));
    used += sizes.back();
  }
  sizes.push_back(n - used);
  for (int s : sizes)
    if (s < 1) throw InvalidArgument("general_se: a group is empty at this dimension");
  return sizes;
}

}  // namespace

GeneralSeCheckResult run_general_se_check(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::general_se_check);
  validate_config(c);
  const GeneralSeCheckConfig& g = c.general_se;
  const auto& tol = c.tolerances;
  GeneralSeCheckResult out;
  out.report = new_report(c);

  if (g.orbit) {
    const int N = g.dimension, T = c.iterations;
    const std::vector<int> sizes = group_sizes(N, g.group_fractions);
    const int groups = static_cast<int>(sizes.size());
    std::vector<double> fractions;
    for (int s : sizes) fractions.push_back(static_cast<double>(s) / N);
    std::vector<SideInfoSampler> samplers;
    for (const auto& s : g.side_info) samplers.push_back(make_sampler(s));
    const Nonlinearity family = make_family(g.family);
    const bool ones = g.initial == "ones";

    // SigmaHat^0_a = E g(x^0, Y_a)^2 with x^0 drawn as in the orbit.
    std::vector<Matrix> sigma_hat0;
    for (int a = 0; a < groups; ++a) {
      auto rng = make_stream(c.base_seed, {11, static_cast<std::uint64_t>(a)});
      std::normal_distribution<double> normal;
      double acc = 0.0, x = 1.0, y = 0.0, v = 0.0;
      for (std::size_t k = 0; k < g.mc_samples; ++k) {
        if (!ones) x = normal(rng);
        samplers[a](rng, std::span<double>(&y, 1));
        family.value(std::span<const double>(&x, 1), std::span<const double>(&y, 1), a, 0, std::span<double>(&v, 1));
        acc += v * v;
      }
      sigma_hat0.push_back(Matrix::Constant(1, 1, acc / static_cast<double>(g.mc_samples)));
    }
    GeneralSeOptions se_opts;
    se_opts.mc_samples = g.mc_samples;
    se_opts.seed = c.base_seed;
    se_opts.threads = c.threads;
    const auto states = general_se_run(fractions, samplers, family, sigma_hat0, T, se_opts);

    // stats[k][t-1][a][f]; the second moment is appended as the last function.
    std::vector<std::string> functions = g.test_functions;
    functions.push_back("x2");
    const std::size_t nf = functions.size();
    std::vector<std::vector<double>> stats(c.trials);
    detail::parallel_for(stats.size(), c.threads, [&](std::size_t k) {
      const std::uint64_t seed = c.trial_seed(static_cast<int>(k));
      SymmetricInstance inst;
      inst.matrix = sample_symmetric_matrix(N, seed);
      inst.group_sizes = sizes;
      inst.nonlinearity = family;
      inst.side_info.resize(N, 1);
      inst.initial.resize(N, 1);
      auto rng = make_stream(seed, {12});
      std::normal_distribution<double> normal;
      for (int a = 0, i = 0; a < groups; ++a)
        for (int r = 0; r < sizes[a]; ++r, ++i) samplers[a](rng, std::span<double>(&inst.side_info(i, 0), 1));
      auto rng0 = make_stream(seed, {13});
      for (int i = 0; i < N; ++i) inst.initial(i, 0) = ones ? 1.0 : normal(rng0);
      const OrbitTrace tr = symmetric_amp_run(inst, T);
      auto& row = stats[k];
      row.assign(static_cast<std::size_t>(T) * groups * nf, 0.0);
      for (int t = 1; t <= T; ++t) {
        for (int a = 0, start = 0; a < groups; start += sizes[a], ++a) {
          for (std::size_t f = 0; f < nf; ++f) {
            double acc = 0.0;
            for (int i = start; i < start + sizes[a]; ++i) acc += test_function(functions[f], tr.states[t](i, 0));
            row[((t - 1) * groups + a) * nf + f] = acc / sizes[a];
          }
        }
      }
    });

    for (int t = 1; t <= T; ++t) {
      const double sigma = states[t - 1].sigma(0, 0);
      for (int a = 0; a < groups; ++a) {
        for (std::size_t f = 0; f < nf; ++f) {
          const std::size_t idx = ((t - 1) * groups + a) * nf + f;
          double mean = 0.0, var = 0.0;
          for (const auto& row : stats) mean += row[idx];
          mean /= c.trials;
          for (const auto& row : stats) var += (row[idx] - mean) * (row[idx] - mean);
          const double sd = c.trials > 1 ? std::sqrt(var / (c.trials - 1)) : 0.0;
          OrbitStatistic st{t, a, functions[f], mean, sd, gaussian_expectation(functions[f], sigma)};
          const double gap = std::abs(st.empirical_mean - st.expected);
          if (f + 1 == nf) {
            out.report.add("second moment " + where(t, a), gap, tol.moment_rel * sigma, gap <= tol.moment_rel * sigma);
            continue;
          }
          st.pass = gap <= tol.stat_sigmas * sd;
          out.report.add("E " + st.function + " " + where(t, a), gap, tol.stat_sigmas * sd, st.pass);
          out.statistics.push_back(st);
        }
      }
    }
  }

  if (g.diagonal_identity) {
    GeneralSeOptions opts;
    opts.mc_samples = g.mc_samples;
    opts.seed = c.base_seed;
    opts.threads = c.threads;
    out.diagonal = verify_diagonal_identity(c.coupling.build(), c.delta(), c.noise_var, c.prior,
                                            g.diagonal_iterations, opts);
    for (int t = 1; t < out.diagonal->rel_deviation.rows(); ++t) {
      const double d = out.diagonal->rel_deviation.row(t).maxCoeff();
      out.report.add("diagonal identity t=" + std::to_string(t), d, tol.diagonal, d <= tol.diagonal);
    }
  }
  return out;
}

void write_general_se_csv(std::ostream& os, const ExperimentConfig& c, const GeneralSeCheckResult& r) {
  const std::string hash = config_hash(c);
  os << "config_hash,check,t,group,function,empirical,std,expected,pass\n";
  for (const auto& s : r.statistics) {
    os << hash << ",orbit," << s.t << ',' << s.group << ',' << s.function << ',' << format_double(s.empirical_mean)
       << ',' << format_double(s.cross_seed_std) << ',' << format_double(s.expected) << ',' << (s.pass ? 1 : 0)
       << '\n';
  }
  if (!r.diagonal) return;
  const auto& d = *r.diagonal;
  for (int t = 1; t < d.general.rows(); ++t) {
    for (int a = 0; a < d.general.cols(); ++a) {
      const bool pass = d.rel_deviation(t, a) <= c.tolerances.diagonal;
      os << hash << ",diagonal," << t << ',' << a << ",inv_sigma," << format_double(d.general(t, a)) << ",nan,"
         << format_double(d.coupled(t, a)) << ',' << (pass ? 1 : 0) << '\n';
    }
  }
}

Report run_experiment(const ExperimentConfig& c, std::ostream& csv, std::ostream* summary) {
  switch (c.kind) {
    case ExperimentKind::cs_mc: {
      const CsMcResult r = run_cs_monte_carlo(c);
      write_cs_mc_csv(csv, c, r);
      if (summary) write_cs_mc_summary_csv(*summary, c, r);
      return r.report;
    }
    case ExperimentKind::se_only: {
      const SeOnlyResult r = run_se_only(c);
      write_se_csv(csv, c, r);
      return r.report;
    }
    case ExperimentKind::sweep: {
      const SweepResult r = run_delta_sweep(c);
      write_sweep_csv(csv, c, r);
      return r.report;
    }
    case ExperimentKind::embed_check: {
      const EmbedCheckResult r = run_embed_check(c);
      write_embed_csv(csv, c, r);
      return r.report;
    }
    case ExperimentKind::general_se_check: {
      const GeneralSeCheckResult r = run_general_se_check(c);
      write_general_se_csv(csv, c, r);
      return r.report;
    }
  }
  throw InvalidArgument("unknown experiment kind");
}

}  // namespace ampse
