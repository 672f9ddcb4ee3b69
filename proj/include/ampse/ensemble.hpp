#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ampse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct CouplingReport {
  bool ok = true;
  std::vector<int> bad_rows;     // row sum outside [1/2, 2]
  std::vector<int> bad_columns;  // no strictly positive entry
  std::vector<std::string> messages;
};

/// Checks rough row-stochasticity and that every column is supported.
CouplingReport validate_coupling(const Matrix& w);

/// Nonnegative Lr x Lc variance profile W. Always valid once constructed.
class CouplingMatrix {
 public:
  /// Throws InvalidArgument with the violation report if `w` is not valid.
  explicit CouplingMatrix(Matrix w);

  const Matrix& entries() const { return w_; }
  double operator()(int r, int c) const { return w_(r, c); }
  int rows() const { return static_cast<int>(w_.rows()); }
  int cols() const { return static_cast<int>(w_.cols()); }

  bool operator==(const CouplingMatrix& o) const { return w_ == o.w_; }

 private:
  Matrix w_;
};

/// W_{r,c} = profile[|r-c|] inside the band, then rows rescaled to sum to one.
CouplingMatrix band_coupling(int lr, int lc, const std::vector<double>& profile);

/// Config-level description: either explicit rows or a band constructor.
struct CouplingSpec {
  struct Band {
    int lr = 1;
    int lc = 1;
    std::vector<double> profile{1.0};
    bool operator==(const Band&) const = default;
  };
  std::optional<Band> band;
  std::vector<std::vector<double>> rows;

  CouplingMatrix build() const;
  bool operator==(const CouplingSpec&) const = default;
};

void to_json(nlohmann::json& j, const CouplingSpec& s);
void from_json(const nlohmann::json& j, CouplingSpec& s);
nlohmann::json coupling_to_json(const CouplingMatrix& w);

/// The block-variance ensemble M(W, m0, n0). Rows and columns are grouped in
/// contiguous blocks: row i belongs to group i / m0, column j to j / n0.
struct EnsembleSpec {
  CouplingMatrix coupling;
  int m0 = 1;
  int n0 = 1;

  EnsembleSpec(CouplingMatrix w, int rows_per_group, int cols_per_group);

  int lr() const { return coupling.rows(); }
  int lc() const { return coupling.cols(); }
  int m() const { return m0 * lr(); }
  int n() const { return n0 * lc(); }
  double delta() const { return static_cast<double>(m0) / n0; }
  int row_group(int i) const { return i / m0; }
  int col_group(int j) const { return j / n0; }
};

struct SensingMatrix {
  Matrix values;
  EnsembleSpec spec;
  std::uint64_t seed = 0;
};

struct SamplingLimits {
  /// Upper bound on m*n; dense storage is 8 bytes per entry.
  std::size_t max_entries = 300'000'000;
};

/// A_ij ~ N(0, W_{g(i),g(j)} / m0), independent. Block (r,c) is drawn from
/// its own substream, so values do not depend on fill order.
SensingMatrix sample_sensing_matrix(const EnsembleSpec& spec, std::uint64_t seed,
                                    const SamplingLimits& limits = {});

/// A = G + G^T with G_ij ~ N(0, 1/(2N)).
Matrix sample_symmetric_matrix(int n, std::uint64_t seed, const SamplingLimits& limits = {});

/// I.i.d. N(0, variance) entries.
Matrix sample_gaussian_matrix(int rows, int cols, double variance, std::uint64_t seed,
                              const SamplingLimits& limits = {});

}  // namespace ampse
