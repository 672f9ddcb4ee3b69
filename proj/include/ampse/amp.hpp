#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ampse/ensemble.hpp"
#include "ampse/nonlinearity.hpp"
#include "ampse/priors.hpp"
#include "ampse/se.hpp"

namespace ampse {

// ---------------------------------------------------------------------------
// Compressed sensing AMP with a spatially coupled sensing matrix
//
//   x^{t+1} = eta_t( x^t + (Q^t . A)^T r^t )
//   r^t     = y - A x^t + b^t . r^{t-1}
//
// started from x^1 = E X and r^0 = 0. Q^t, eta_t and b^t are built from a
// precomputed coupled state-evolution schedule.
// ---------------------------------------------------------------------------

/// Q_{r,u} = phi_r^{-1} / sum_k W_{k,u} phi_k^{-1}. Every weighted column sum
/// sum_r W_{r,u} Q_{r,u} equals one.
Matrix compute_q(const CouplingMatrix& w, const Vector& phi);

/// Q for step t of a schedule. At t = 0 all phi are +inf and the ratio is taken
/// in the equal-phi limit, Q_{r,u} = 1 / sum_k W_{k,u}.
Matrix schedule_q(const SeSchedule& schedule, int t);

/// b_r = (1/delta) sum_u W_{r,u} Q_{r,u} <eta'>_u, one value per row group.
Vector compute_onsager(const CouplingMatrix& w, const Matrix& q_prev, const Vector& eta_prime_avgs,
                       double delta);

struct CsAmpOptions {
  double divergence_limit = 1e12;
};

struct CsAmpTrace {
  std::vector<Vector> estimates;       ///< x^t, t = 1..T+1 (index t-1)
  std::vector<Vector> residuals;       ///< r^t, t = 1..T
  std::vector<Vector> pseudo_data;     ///< x^t + (Q^t . A)^T r^t, t = 1..T
  std::vector<Vector> onsager;         ///< b^t per row group, t = 1..T
  std::vector<Matrix> q;               ///< Q^t, t = 1..T
  std::vector<Vector> eta_prime_avgs;  ///< <eta'_t>_u, t = 1..T
  Matrix block_mse;                    ///< row t-1: per column block MSE of x^t; empty without truth
};

/// Runs T iterations, producing x^1..x^{T+1}. The prior, noise level and
/// coupling are taken from the schedule, which must match the matrix ensemble.
CsAmpTrace cs_amp_run(const SensingMatrix& a, const Vector& y, const SeSchedule& schedule,
                      int iterations, const std::optional<Vector>& truth = std::nullopt,
                      const CsAmpOptions& opts = {});

/// Per-block MSE predicted by the schedule, same layout as CsAmpTrace::block_mse.
Matrix predicted_mse_table(const SeSchedule& schedule, int iterations);

/// Rows `run_id, seed, t, block, mse_empirical, mse_predicted, onsager_norm`.
void write_trace_csv(std::ostream& os, const std::string& run_id, std::uint64_t seed,
                     const CsAmpTrace& trace, const Matrix& predicted, bool header = true);

// ---------------------------------------------------------------------------
// General symmetric orbit: x^{t+1} = A f(x^t; t) - f(x^{t-1}; t-1) B_t^T,
// B_t = (1/N) sum_j df^j/dx (x^t_j, t), f(x^{-1}; -1) = 0.
// ---------------------------------------------------------------------------

struct SymmetricInstance {
  Matrix matrix;                  ///< N x N symmetric
  std::vector<int> group_sizes;   ///< contiguous partition of [N]
  RowMatrix side_info;            ///< N x q
  Nonlinearity nonlinearity;
  RowMatrix initial;              ///< x^0, N x q

  void validate() const;
};

struct OrbitOptions {
  double divergence_limit = 1e12;
  /// Compare analytic Jacobians against central differences on a few rows per step.
  bool check_jacobians = false;
  double jacobian_tol = 1e-5;
};

struct OrbitTrace {
  std::vector<RowMatrix> states;                   ///< x^t, t = 0..T
  std::vector<Matrix> onsager;                     ///< B_t, t = 0..T-1
  std::vector<std::vector<Matrix>> group_moments;  ///< [t][a] = <x^t_{C_a}, x^t_{C_a}>
};

OrbitTrace symmetric_amp_run(const SymmetricInstance& instance, int iterations,
                             const OrbitOptions& opts = {});

/// (1/|C_a|) sum_{i in C_a} x_i x_i^T for each contiguous group.
std::vector<Matrix> group_second_moments(const RowMatrix& x, const std::vector<int>& group_sizes);

// ---------------------------------------------------------------------------
// Bipartite orbit on a rectangular matrix:
//   u^t     = At e(v^t, y; t)   - h(u^{t-1}, w; t-1) B_t^T,  B_t = (1/m) sum_k de/dv
//   v^{t+1} = At^T h(u^t, w; t) - e(v^t, y; t) D_t^T,        D_t = (1/m) sum_l dh/du
// started from v^1 with h(u^0, w; 0) = 0.
// ---------------------------------------------------------------------------

struct BipartiteInstance {
  Matrix a_tilde;                     ///< m x n
  std::vector<int> row_group_sizes;   ///< groups seen by h
  std::vector<int> col_group_sizes;   ///< groups seen by e
  Nonlinearity e;
  Nonlinearity h;
  RowMatrix y;   ///< n x q
  RowMatrix w;   ///< m x q
  RowMatrix v1;  ///< n x q

  void validate() const;
};

struct BipartiteTrace {
  std::vector<RowMatrix> u;  ///< u^t, t = 1..T (index t-1)
  std::vector<RowMatrix> v;  ///< v^t, t = 1..T+1 (index t-1)
  std::vector<Matrix> b;     ///< B_t, t = 1..T
  std::vector<Matrix> d;     ///< D_t, t = 1..T
};

BipartiteTrace bipartite_amp_run(const BipartiteInstance& instance, int iterations,
                                 const OrbitOptions& opts = {});

// ---------------------------------------------------------------------------
// Reduction of compressed sensing AMP to the bipartite and symmetric orbits.
// ---------------------------------------------------------------------------

/// One compressed sensing problem together with its state-evolution schedule.
struct CsInstance {
  SensingMatrix a;
  Vector x;
  Vector noise;
  Vector y;
  SeSchedule schedule;
};

/// Samples x ~ prior, w ~ N(0, noise_var), A ~ M(W, m0, n0) from `seed` and
/// runs the coupled recursion for `iterations` steps (no early stop).
CsInstance make_cs_instance(const EnsembleSpec& spec, const Prior& prior, double noise_var,
                            int iterations, std::uint64_t seed);

/// r~^t = w - r^t (t = 1..T) and x~^{t+1} = x - x^t - (Q^t . A)^T r^t, with x~^1 = x - E X.
struct ChangeOfVariables {
  std::vector<Vector> r_tilde;  ///< index t-1
  std::vector<Vector> x_tilde;  ///< index t-1, t = 1..T+1
};

ChangeOfVariables change_of_variables(const CsInstance& cs, const CsAmpTrace& trace);

/// e(v, y, a; t) = sqrt(Lr) (eta_{t-1,a}(y_a - v_a) - y_a) [sqrt(W_{1,a}), ..., sqrt(W_{Lr,a}), 0, ...]
Nonlinearity cs_e_family(const SeSchedule& schedule, int max_t);
/// h(u, w, a; t) = sqrt(Lr) (u_a - w_a) [sqrt(W_{a,1}) Q^t_{a,1}, ..., sqrt(W_{a,Lc}) Q^t_{a,Lc}, 0, ...]
Nonlinearity cs_h_family(const SeSchedule& schedule, int max_t);

/// Normalized matrix At_ij = A_ij / sqrt(Lr W_{g(i),g(j)}). Blocks with W = 0
/// carry no information and are refilled with fresh N(0, 1/m) draws from `seed`.
Matrix normalized_matrix(const SensingMatrix& a, std::uint64_t seed);

/// Bipartite orbit whose coordinates reproduce (r~^t, x~^{t+1}).
BipartiteInstance build_bipartite(const CsInstance& cs, std::uint64_t seed, int max_t);

/// g of the symmetric embedding, with q = Lr + Lc and factor sqrt((delta+1)/delta):
///   even step 2t: 0 on row groups, e(., ., a - Lr; t+1) on column groups
///   odd step 2t+1: h(., ., a; t+1) on row groups, 0 on column groups
Nonlinearity embedding_nonlinearity(const SeSchedule& schedule, double delta_embed, int max_t);

/// Symmetric instance on N = m + n whose orbit satisfies
///   x_s^{2t}_{m+j} = v^{t+1}_j  and  x_s^{2t+1}_i = u^{t+1}_i.
/// B1 = C1 + C1^T, B2 = C2 + C2^T with C entries N(0, 1/(2m)), drawn from `seed`.
SymmetricInstance build_embedding(const CsInstance& cs, std::uint64_t seed, int max_t);

}  // namespace ampse
