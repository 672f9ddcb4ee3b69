#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ampse/amp.hpp"
#include "ampse/ensemble.hpp"
#include "ampse/priors.hpp"

namespace ampse {

enum class ExperimentKind { cs_mc, se_only, sweep, embed_check, general_se_check };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Acceptance gates. Every comparison made by the harness reads its limit from here.
struct Tolerances {
  double mc_rel = 0.10;       ///< cs_mc: relative band around the SE prediction
  double mc_sigmas = 3.0;     ///< cs_mc: alternative band in cross-trial standard deviations; 0 disables
  double embed = 1e-6;        ///< embed_check: max relative coordinate deviation
  double diagonal = 0.02;     ///< general_se_check: diagonal identity relative deviation
  double stat_sigmas = 3.0;   ///< general_se_check: test-function band in cross-seed sigmas
  double moment_rel = 0.10;   ///< general_se_check: second moment vs Sigma^t
  bool operator==(const Tolerances&) const = default;
};

struct SweepConfig {
  std::vector<double> deltas;     ///< grid for the phase curve
  double threshold = 1e-3;        ///< max-block MSE defining success
  bool bisect = true;
  double lo = 0.1;
  double hi = 1.0;
  int steps = 14;
  int max_iterations = 20000;
  double stop_tol = 1e-10;
  std::vector<double> mc_deltas;  ///< optional Monte Carlo confirmation points
  bool require_decreasing = false;
  std::optional<double> critical_min;
  std::optional<double> critical_max;
  bool operator==(const SweepConfig&) const = default;
};

struct SideInfoSpec {
  std::string kind = "none";  ///< none | gaussian | rademacher
  double variance = 1.0;
  bool operator==(const SideInfoSpec&) const = default;
};

/// g(x, y) = tanh(gain x) + side y (kind tanh) or g = x (kind identity), q = 1.
struct ScalarFamilySpec {
  std::string kind = "identity";
  double gain = 1.0;
  double side = 0.0;
  bool operator==(const ScalarFamilySpec&) const = default;
};

struct GeneralSeCheckConfig {
  bool orbit = true;
  int dimension = 10000;
  std::vector<double> group_fractions{1.0};
  std::vector<SideInfoSpec> side_info{SideInfoSpec{}};
  ScalarFamilySpec family;
  std::string initial = "ones";  ///< ones | gaussian
  /// Gated against cross-seed sigmas; the second moment is always gated against moment_rel.
  std::vector<std::string> test_functions{"x", "x2", "abs"};
  std::size_t mc_samples = 1'000'000;
  bool diagonal_identity = true;
  int diagonal_iterations = 6;
  bool operator==(const GeneralSeCheckConfig&) const = default;
};

struct EmbedCheckConfig {
  bool degenerate = false;  ///< replace e, h (and g) by the null family
  bool operator==(const EmbedCheckConfig&) const = default;
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::cs_mc;
  Prior prior = Prior::gaussian(0.0, 1.0);
  CouplingSpec coupling{std::nullopt, {{1.0}}};
  int m0 = 1;
  int n0 = 1;
  double noise_var = 0.0;
  int iterations = 10;
  int trials = 1;
  std::uint64_t base_seed = 0;
  int threads = 1;
  std::string output;
  Tolerances tolerances;
  SweepConfig sweep;
  GeneralSeCheckConfig general_se;
  EmbedCheckConfig embed;

  double delta() const { return static_cast<double>(m0) / n0; }
  std::uint64_t trial_seed(int k) const { return base_seed + static_cast<std::uint64_t>(k); }
  EnsembleSpec ensemble() const { return EnsembleSpec(coupling.build(), m0, n0); }

  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Unknown keys are rejected; missing keys take the defaults above.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Sorted-key JSON dump without `threads` and `output`; the basis of config_hash.
std::string canonical_config(const ExperimentConfig& c);
/// FNV-1a 64 of canonical_config, as 16 lowercase hex digits.
std::string config_hash(const ExperimentConfig& c);
/// Throws InvalidArgument on the first inconsistency.
void validate_config(const ExperimentConfig& c);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Gate {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string kind;
  std::string config_hash;
  std::vector<Gate> gates;
  std::vector<std::string> failures;  ///< trial-level errors

  bool passed() const;
  void add(std::string name, double value, double limit, bool pass, std::string detail = {});
};

/// Human-readable gate listing.
void print_report(std::ostream& os, const Report& r);

// ---------------------------------------------------------------------------
// cs_mc
// ---------------------------------------------------------------------------

struct TrialResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Matrix mse_emp;  ///< row t-1: MSE of x^t per column block, t = 1..T+1
  Matrix mse_se;
  double wall_seconds = 0.0;
};

struct CsMcResult {
  std::vector<TrialResult> trials;
  Matrix mean;       ///< over successful trials
  Matrix stddev;     ///< cross-trial sample standard deviation
  Matrix predicted;
  Report report;
};

CsMcResult run_cs_monte_carlo(const ExperimentConfig& c);
/// config_hash,seed,t,block,mse_emp,mse_se,rel_err
void write_cs_mc_csv(std::ostream& os, const ExperimentConfig& c, const CsMcResult& r);
/// config_hash,t,block,mse_mean,mse_std,mse_se,limit,pass
void write_cs_mc_summary_csv(std::ostream& os, const ExperimentConfig& c, const CsMcResult& r);

// ---------------------------------------------------------------------------
// se_only
// ---------------------------------------------------------------------------

struct SeOnlyResult {
  SeSchedule schedule;
  Report report;
};

SeOnlyResult run_se_only(const ExperimentConfig& c);
/// config_hash,t,kind,index,value with kind phi|psi
void write_se_csv(std::ostream& os, const ExperimentConfig& c, const SeOnlyResult& r);

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
  double delta = 0.0;
  std::string kind;  ///< se_max_mse | se_iterations | mc_max_mse | critical_delta
  double value = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> critical_delta;
  Report report;
};

/// Converged max-block SE MSE at one delta, and the number of steps taken.
std::pair<double, int> converged_max_mse(const ExperimentConfig& c, double delta);
SweepResult run_delta_sweep(const ExperimentConfig& c);
/// config_hash,kind,delta,value
void write_sweep_csv(std::ostream& os, const ExperimentConfig& c, const SweepResult& r);

// ---------------------------------------------------------------------------
// embed_check
// ---------------------------------------------------------------------------

struct EmbedDeviation {
  std::string identity;  ///< prop_u | prop_v | sym_u | sym_v | null_*
  int t = 0;
  double max_deviation = 0.0;
};

struct EmbedCheckResult {
  std::vector<EmbedDeviation> rows;
  double max_deviation = 0.0;
  std::string worst;  ///< identity, coordinate and step of the largest deviation
  std::optional<std::string> first_offending;
  Report report;
};

EmbedCheckResult run_embed_check(const ExperimentConfig& c);
/// config_hash,identity,t,max_deviation
void write_embed_csv(std::ostream& os, const ExperimentConfig& c, const EmbedCheckResult& r);

// ---------------------------------------------------------------------------
// general_se_check
// ---------------------------------------------------------------------------

struct OrbitStatistic {
  int t = 0;
  int group = 0;
  std::string function;
  double empirical_mean = 0.0;
  double cross_seed_std = 0.0;
  double expected = 0.0;
  bool pass = false;
};

struct GeneralSeCheckResult {
  std::vector<OrbitStatistic> statistics;
  std::optional<DiagonalIdentityReport> diagonal;
  Report report;
};

GeneralSeCheckResult run_general_se_check(const ExperimentConfig& c);
/// config_hash,check,t,group,function,empirical,std,expected,pass
void write_general_se_csv(std::ostream& os, const ExperimentConfig& c, const GeneralSeCheckResult& r);

/// Runs the experiment named by c.kind, writes its main CSV to `csv` and
/// returns the report.
/// A cs_mc run also writes its per-(t, block) summary to `summary` when given.
Report run_experiment(const ExperimentConfig& c, std::ostream& csv, std::ostream* summary = nullptr);

}  // namespace ampse
