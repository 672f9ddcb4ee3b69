// Acceptance runner: `acceptance N` checks criterion N (1..7), no argument runs all.
// Prints one PASS/FAIL line per criterion; exit code 0 iff every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "ampse/amp.hpp"
#include "ampse/error.hpp"
#include "ampse/harness.hpp"
#include "ampse/random.hpp"

using namespace ampse;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[FAILED " << what << "] ";
    }
  }
};

ExperimentConfig config(const std::string& name) {
  return load_config(std::string(AMPSE_CONFIG_DIR) + "/" + name);
}

int failed_gates(const Report& r) {
  int n = 0;
  for (const auto& g : r.gates) n += g.pass ? 0 : 1;
  return n + static_cast<int>(r.failures.size());
}

void note_report(Outcome& o, const std::string& label, const Report& r) {
  o.detail << label << ": " << r.gates.size() - failed_gates(r) << "/" << r.gates.size() << " gates; ";
  if (!r.passed()) {
    std::ostringstream os;
    print_report(os, r);
    std::cerr << os.str();
  }
  o.require(r.passed(), label);
}

// Lemma-level check on a coupled band: per-block empirical MSE vs state evolution.
void criterion1(Outcome& o) {
  const auto c = config("coupled_mc.json");
  const CsMcResult r = run_cs_monte_carlo(c);
  double worst = 0.0;
  for (int t = 0; t < r.mean.rows(); ++t)
    for (int b = 0; b < r.mean.cols(); ++b)
      worst = std::max(worst, std::abs(r.mean(t, b) / r.predicted(t, b) - 1.0));
  note_report(o, "coupled cs_mc", r.report);
  o.detail << "largest relative gap " << worst;
}

// Gaussian prior, one block: closed-form recursion and Monte Carlo.
void criterion2(Outcome& o) {
  const double delta = 0.5, s2 = 0.2;
  const auto s = coupled_se_run(band_coupling(1, 1, {1.0}), delta, s2, Prior::gaussian(0, 1), 30,
                                CoupledSeOptions{.stop_tol = 0.0});
  // psi(1) = 1, phi = s2 + psi / delta, psi' = phi / (1 + phi).
  double psi = 1.0, gap = 0.0;
  for (int t = 1; t <= 30; ++t) {
    gap = std::max(gap, std::abs(s.psi[t](0) - psi));
    const double phi = s2 + psi / delta;
    gap = std::max(gap, std::abs(s.phi[t](0) - phi));
    psi = phi / (1.0 + phi);
  }
  o.require(std::abs(s.phi[1](0) - 2.2) < 1e-10 && std::abs(s.psi[2](0) - 0.6875) < 1e-10, "phi(1), psi(2)");
  o.require(gap < 1e-10, "closed form");
  o.detail << "closed-form gap " << gap << "; ";
  note_report(o, "single-block cs_mc", run_cs_monte_carlo(config("single_block_gaussian.json")).report);
}

// Exact equivalence of the three iterations.
void criterion3(Outcome& o) {
  auto c = config("embed_small.json");
  const EmbedCheckResult r = run_embed_check(c);
  o.require(r.max_deviation < 1e-8, "max deviation below 1e-8");
  bool sym = false, prop = false;
  for (const auto& row : r.rows) {
    sym = sym || row.identity.starts_with("sym");
    prop = prop || row.identity.starts_with("prop");
  }
  o.require(sym && prop && c.iterations >= 6, "coverage");
  o.detail << "m=" << c.m0 * 2 << " n=" << c.n0 * 2 << " T=" << c.iterations << " max deviation " << r.max_deviation
           << " (" << r.worst << "); ";
  c.embed.degenerate = true;
  const EmbedCheckResult null = run_embed_check(c);
  o.require(null.max_deviation == 0.0, "null dynamics");
  o.detail << "null dynamics deviation " << null.max_deviation;
}

// Diagonal identity: general matrix SE vs coupled scalar SE.
void criterion4(Outcome& o) {
  auto band = config("diagonal_band.json");
  auto single = band;
  single.coupling = CouplingSpec{std::nullopt, {{1.0}}};
  single.m0 = 1;
  single.n0 = 2;
  for (const auto& [label, c] : {std::pair{"W=[1]", single}, std::pair{"3-block band", band}}) {
    o.require(c.general_se.mc_samples >= 1'000'000 && c.general_se.diagonal_iterations >= 6, "sample budget");
    const GeneralSeCheckResult r = run_general_se_check(c);
    o.detail << label << " max deviation " << r.diagonal->max_rel_deviation << "; ";
    note_report(o, label, r.report);
  }
}

// Phase-transition ordering from two bisections.
void criterion5(Outcome& o) {
  const auto iid_cfg = config("sweep_iid.json");
  const auto sc_cfg = config("sweep_coupled.json");
  const SweepResult iid = run_delta_sweep(iid_cfg);
  const SweepResult sc = run_delta_sweep(sc_cfg);
  const auto& prior = iid_cfg.prior;
  const double eps = 1.0 - prior.atoms.front().weight;
  o.require(sc_cfg.coupling.build().cols() >= 32, "Lc >= 32");
  o.require(iid.critical_delta && sc.critical_delta, "both bisections bracketed");
  if (!iid.critical_delta || !sc.critical_delta) return;
  const double di = *iid.critical_delta, ds = *sc.critical_delta;
  o.require(eps <= ds, "eps <= delta_sc");
  o.require(ds <= di, "delta_sc <= delta_iid");
  o.require(ds - eps <= 0.1, "delta_sc - eps <= 0.1");
  o.detail << "delta_iid=" << di << " delta_sc=" << ds << " eps=" << eps;
}

// Invariant suites.
void criterion6(Outcome& o) {
  const std::vector<Prior> zoo{Prior::bernoulli_gaussian(0.1), Prior::discrete({{-1, 0.25}, {0, 0.5}, {2, 0.25}}),
                               Prior{{{0.0, 0.5}}, {{0.3, 1.0, 0.5}, {0.2, -2.0, 2.0}}}};

  double fd = 0.0;
  for (const auto& p : zoo)
    for (double snr : {0.3, 2.0, 15.0})
      for (double y = -4.0; y <= 4.0; y += 0.37) {
        const double h = 1e-5;
        const double num = (denoise(p, y + h, snr).mean - denoise(p, y - h, snr).mean) / (2 * h);
        fd = std::max(fd, std::abs(num - denoise(p, y, snr).mean_derivative));
      }
  o.require(fd < 1e-5, "denoiser derivative");
  o.detail << "fd " << fd << "; ";

  bool mono = true;
  for (const auto& p : zoo) {
    double prev = variance(p);
    for (int k = 0; k < 50; ++k) {
      const double m = mmse(p, std::pow(10.0, -3.0 + 7.0 * k / 49.0));
      mono = mono && m <= prev + 1e-12 && m >= 0.0;
      prev = m;
    }
  }
  o.require(mono, "mmse monotone");

  const auto band = config("coupled_mc.json");
  const auto s = coupled_se_run(band.coupling.build(), band.delta(), band.noise_var, band.prior, 80,
                                CoupledSeOptions{.stop_tol = 0.0});
  double rise = 0.0;
  for (std::size_t t = 2; t < s.psi.size(); ++t) rise = std::max(rise, (s.psi[t] - s.psi[t - 1]).maxCoeff());
  o.require(rise <= 1e-15, "psi monotone in t");

  auto rng = make_stream(6);
  std::uniform_real_distribution<double> unif(0.01, 10.0);
  double qsum = 0.0;
  const auto w = band.coupling.build();
  for (int rep = 0; rep < 20; ++rep) {
    Vector phi(w.rows());
    for (auto& v : phi) v = unif(rng);
    const Vector sums = w.entries().cwiseProduct(compute_q(w, phi)).colwise().sum().transpose();
    qsum = std::max(qsum, (sums.array() - 1.0).abs().maxCoeff());
  }
  o.require(qsum <= 1e-12, "Q column sums");
  o.detail << "Q identity " << qsum << "; ";

  // Stein: E[Z eta(Z)] = sigma^2 E[eta'(Z)] for Z ~ N(0, sigma^2).
  double worst_z = 0.0;
  for (const auto& p : zoo) {
    auto g = make_stream(7);
    const double sigma2 = 0.7;
    std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
    const int n = 1'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double z = normal(g);
      const auto st = denoise(p, z, 2.0);
      const double v = z * st.mean - sigma2 * st.mean_derivative;
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
    worst_z = std::max(worst_z, std::abs(mean) / se);
  }
  o.require(worst_z < 4.0, "Stein identity");
  o.detail << "Stein z " << worst_z << "; ";

  const EnsembleSpec spec(band_coupling(3, 2, {1.0, 0.5}), 200, 300);
  const auto a = sample_sensing_matrix(spec, 8);
  double worst_block = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) {
      const double var = spec.coupling(r, c) / spec.m0;
      const auto blk = a.values.block(r * 200, c * 300, 200, 300);
      if (var == 0.0) {
        o.require(blk.isZero(0.0), "zero block");
        continue;
      }
      const double emp = blk.squaredNorm() / blk.size();
      worst_block = std::max(worst_block, std::abs(emp - var) / (var * std::sqrt(2.0 / blk.size())));
    }
  o.require(worst_block < 4.0, "block variances");
  o.detail << "block variance z " << worst_block << "; ";

  ExperimentConfig small;
  small.kind = ExperimentKind::cs_mc;
  small.prior = Prior::bernoulli_gaussian(0.2);
  small.coupling = CouplingSpec{CouplingSpec::Band{4, 3, {1.0, 0.5}}, {}};
  small.m0 = 60;
  small.n0 = 100;
  small.noise_var = 1e-3;
  small.iterations = 8;
  small.trials = 3;
  small.base_seed = 42;
  std::ostringstream first, second;
  run_experiment(small, first);
  small.threads = 2;
  run_experiment(small, second);
  o.require(first.str() == second.str() && first.str().size() > 100, "bit-exact rerun");
  o.detail << "rerun identical (" << first.str().size() << " bytes)";
}

// Orbit statistics vs general state evolution.
void criterion7(Outcome& o) {
  const auto c = config("orbit_tanh.json");
  o.require(c.general_se.dimension == 10000 && c.trials == 20, "N and seeds");
  const GeneralSeCheckResult r = run_general_se_check(c);
  double worst = 0.0;
  for (const auto& s : r.statistics)
    if (s.cross_seed_std > 0) worst = std::max(worst, std::abs(s.empirical_mean - s.expected) / s.cross_seed_std);
  o.detail << r.statistics.size() << " statistics, largest |gap|/sigma " << worst << "; ";
  note_report(o, "tanh orbit", r.report);
  note_report(o, "identity orbit moments", run_general_se_check(config("orbit_identity.json")).report);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7};
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty())
    for (int k = 1; k <= 7; ++k) selected.push_back(k);

  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > 7) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k - 1](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
