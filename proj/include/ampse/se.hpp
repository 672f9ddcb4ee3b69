#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ampse/ensemble.hpp"
#include "ampse/nonlinearity.hpp"
#include "ampse/priors.hpp"
#include "ampse/random.hpp"

namespace ampse {

// ---------------------------------------------------------------------------
// Coupled scalar recursion
//
//   phi_a(t)    = sigma^2 + (1/delta) sum_i W_{a,i} psi_i(t)
//   psi_i(t+1)  = mmse( sum_b W_{b,i} / phi_b(t) )
//
// started from psi_i(0) = +inf. The t = 0 step is resolved symbolically:
// phi(0) = +inf, every effective snr is 0, hence psi(1) = Var(X).
// ---------------------------------------------------------------------------

struct CoupledSeOptions {
  /// Stop once max_i |psi_i(t+1) - psi_i(t)| < stop_tol. Zero disables.
  double stop_tol = 1e-10;
  /// Lower bound applied to phi when sigma^2 = 0 drives it to zero.
  double phi_floor = 1e-300;
  MmseOptions mmse;
};

struct SeSchedule {
  CouplingMatrix coupling;
  Prior prior;
  double delta = 1.0;
  double noise_var = 0.0;
  std::vector<Vector> phi;  ///< phi[t], t = 0..; phi[0] holds +inf
  std::vector<Vector> psi;  ///< psi[t], t = 0..phi.size(); psi[0] holds +inf
  bool converged = false;
  std::vector<std::string> warnings;
  MmseOptions mmse_options;

  /// Index of the last computed phi.
  int last() const { return static_cast<int>(phi.size()) - 1; }
  /// phi(t); past the last computed step the recursion is at its fixed point
  /// and the last value is returned.
  const Vector& phi_at(int t) const;
  const Vector& psi_at(int t) const;
  /// s_u(t) = sum_r W_{r,u} / phi_r(t); identically zero at t = 0.
  Vector snr(int t) const;
};

SeSchedule coupled_se_run(const CouplingMatrix& w, double delta, double noise_var,
                          const Prior& prior, int iterations, const CoupledSeOptions& opts = {});

/// mmse at the effective snr of column block `block` after t-1 steps; equals psi_block(t).
double predicted_block_mse(const SeSchedule& schedule, int block, int t);

/// Rows `t, kind, index, value` with kind phi|psi; infinities printed as inf.
void write_schedule_csv(std::ostream& os, const SeSchedule& schedule);

// ---------------------------------------------------------------------------
// General matrix recursion
//
//   Sigma^t       = sum_b c_b SigmaHat^{t-1}_b
//   SigmaHat^t_a  = E{ g(Z, Y_a, a, t) g(Z, Y_a, a, t)^T },  Z ~ N(0, Sigma^t) indep. of Y_a
//
// Expectations are Monte Carlo averages over independent batches.
// ---------------------------------------------------------------------------

/// Draws one side-information vector Y_a ~ P_a into `y`.
using SideInfoSampler = std::function<void(Engine& rng, std::span<double> y)>;

struct GeneralSeOptions {
  std::size_t mc_samples = 1'000'000;
  std::size_t batch_size = 10'000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct GeneralSeState {
  int t = 0;
  Matrix sigma;                        ///< Sigma^t
  std::vector<Matrix> sigma_hat;       ///< SigmaHat^t_a
  std::vector<Matrix> sigma_hat_stderr;  ///< Monte Carlo standard error per entry
};

/// Returns states for t = 1..iterations.
std::vector<GeneralSeState> general_se_run(std::span<const double> group_fractions,
                                           std::span<const SideInfoSampler> samplers,
                                           const Nonlinearity& g,
                                           std::span<const Matrix> sigma_hat0, int iterations,
                                           const GeneralSeOptions& opts = {});

/// Symmetric square root of a PSD matrix. Eigenvalues below 1e-12 * trace are
/// clipped to zero; an eigenvalue below -1e-8 throws.
Matrix psd_sqrt(const Matrix& sigma);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// E psi(Z, Y) with Z ~ N(0, sigma), Y ~ sampler, by batched Monte Carlo.
McEstimate gaussian_side_expectation(
    const Matrix& sigma, const SideInfoSampler& sampler,
    const std::function<double(std::span<const double> z, std::span<const double> y)>& psi,
    const GeneralSeOptions& opts);

// ---------------------------------------------------------------------------
// Diagonal identity between the two recursions on the symmetric embedding of
// a compressed sensing problem: (Sigma^{2t}_{aa})^{-1} = sum_b W_{b,a} / phi_b(t).
// ---------------------------------------------------------------------------

struct DiagonalIdentityReport {
  int iterations = 0;
  Matrix general;   ///< row t: 1 / Sigma^{2t}_{aa}, a in [Lc]; row 0 unused
  Matrix coupled;   ///< row t: s_a(t)
  Matrix rel_deviation;
  double max_rel_deviation = 0.0;
  /// max_u |sum_r W_{r,u} Q_{r,u} - 1| over the steps used.
  double q_identity_error = 0.0;
};

DiagonalIdentityReport verify_diagonal_identity(const CouplingMatrix& w, double delta,
                                                double noise_var, const Prior& prior,
                                                int iterations, const GeneralSeOptions& opts = {});

}  // namespace ampse
