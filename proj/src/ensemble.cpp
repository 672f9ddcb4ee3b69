#include "ampse/ensemble.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ampse/error.hpp"
#include "ampse/random.hpp"

namespace ampse {

namespace {

void check_size(std::size_t rows, std::size_t cols, const SamplingLimits& limits) {
  if (rows * cols > limits.max_entries) {
    std::ostringstream os;
    os << "matrix of " << rows << " x " << cols << " exceeds the entry cap of " << limits.max_entries;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

CouplingReport validate_coupling(const Matrix& w) {
  CouplingReport rep;
  if (w.rows() == 0 || w.cols() == 0) {
    rep.ok = false;
    rep.messages.push_back("empty coupling matrix");
    return rep;
  }
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    rep.ok = false;
    rep.messages.push_back("entries must be finite and nonnegative");
    return rep;
  }
  for (int r = 0; r < w.rows(); ++r) {
    const double s = w.row(r).sum();
    if (s < 0.5 || s > 2.0) {
      rep.ok = false;
      rep.bad_rows.push_back(r);
      std::ostringstream os;
      os << "row " << r << " sum " << s << " outside [1/2, 2]";
      rep.messages.push_back(os.str());
    }
  }
  for (int c = 0; c < w.cols(); ++c) {
    if (!(w.col(c).array() > 0.0).any()) {
      rep.ok = false;
      rep.bad_columns.push_back(c);
      rep.messages.push_back("column " + std::to_string(c) + " has no positive entry");
    }
  }
  return rep;
}

CouplingMatrix::CouplingMatrix(Matrix w) : w_(std::move(w)) {
  const auto rep = validate_coupling(w_);
  if (!rep.ok) {
    std::string msg = "invalid coupling matrix:";
    for (const auto& m : rep.messages) msg += " " + m + ";";
    throw InvalidArgument(msg);
  }
}

CouplingMatrix band_coupling(int lr, int lc, const std::vector<double>& profile) {
  if (lr < 1 || lc < 1) throw InvalidArgument("band_coupling: dimensions must be positive");
  if (profile.empty() || profile.size() > static_cast<std::size_t>(std::max(lr, lc))) {
    throw InvalidArgument("band_coupling: profile length must be in [1, max(Lr, Lc)]");
  }
  bool any = false;
  for (double p : profile) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("band_coupling: negative profile");
    any = any || p > 0.0;
  }
  if (!any) throw InvalidArgument("band_coupling: profile is all zero");

  Matrix w = Matrix::Zero(lr, lc);
  const int width = static_cast<int>(profile.size());
  for (int r = 0; r < lr; ++r) {
    for (int c = 0; c < lc; ++c) {
      const int d = std::abs(r - c);
      if (d < width) w(r, c) = profile[d];
    }
    const double s = w.row(r).sum();
    if (s > 0.0) w.row(r) /= s;
  }
  return CouplingMatrix(std::move(w));
}

CouplingMatrix CouplingSpec::build() const {
  if (band) return band_coupling(band->lr, band->lc, band->profile);
  if (rows.empty()) throw InvalidArgument("coupling: no rows given");
  Matrix w(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw InvalidArgument("coupling: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) w(r, c) = rows[r][c];
  }
  return CouplingMatrix(std::move(w));
}

void to_json(nlohmann::json& j, const CouplingSpec& s) {
  if (s.band) {
    j = {{"band", {{"Lr", s.band->lr}, {"Lc", s.band->lc}, {"profile", s.band->profile}}}};
  } else {
    j = {{"Lr", s.rows.size()}, {"Lc", s.rows.empty() ? 0 : s.rows.front().size()}, {"rows", s.rows}};
  }
}

void from_json(const nlohmann::json& j, CouplingSpec& s) {
  s = CouplingSpec{};
  if (j.contains("band")) {
    const auto& b = j.at("band");
    s.band = CouplingSpec::Band{b.at("Lr").get<int>(), b.at("Lc").get<int>(),
                                b.at("profile").get<std::vector<double>>()};
    return;
  }
  s.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  if (j.contains("Lr") && j.at("Lr").get<std::size_t>() != s.rows.size()) {
    throw InvalidArgument("coupling: Lr does not match number of rows");
  }
  if (j.contains("Lc") && !s.rows.empty() && j.at("Lc").get<std::size_t>() != s.rows.front().size()) {
    throw InvalidArgument("coupling: Lc does not match row length");
  }
}

nlohmann::json coupling_to_json(const CouplingMatrix& w) {
  CouplingSpec s;
  for (int r = 0; r < w.rows(); ++r) {
    s.rows.emplace_back(w.cols());
    for (int c = 0; c < w.cols(); ++c) s.rows.back()[c] = w(r, c);
  }
  return s;
}

EnsembleSpec::EnsembleSpec(CouplingMatrix w, int rows_per_group, int cols_per_group)
    : coupling(std::move(w)), m0(rows_per_group), n0(cols_per_group) {
  if (m0 < 1 || n0 < 1) throw InvalidArgument("ensemble: m0 and n0 must be positive");
}

SensingMatrix sample_sensing_matrix(const EnsembleSpec& spec, std::uint64_t seed,
                                    const SamplingLimits& limits) {
  check_size(spec.m(), spec.n(), limits);
  Matrix a = Matrix::Zero(spec.m(), spec.n());
  std::normal_distribution<double> normal;
  for (int r = 0; r < spec.lr(); ++r) {
    for (int c = 0; c < spec.lc(); ++c) {
      const double w = spec.coupling(r, c);
      if (w == 0.0) continue;
      const double sd = std::sqrt(w / spec.m0);
      auto rng = make_stream(seed, {1, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
      for (int i = r * spec.m0; i < (r + 1) * spec.m0; ++i) {
        for (int j = c * spec.n0; j < (c + 1) * spec.n0; ++j) a(i, j) = sd * normal(rng);
      }
    }
  }
  return SensingMatrix{std::move(a), spec, seed};
}

Matrix sample_symmetric_matrix(int n, std::uint64_t seed, const SamplingLimits& limits) {
  if (n < 1) throw InvalidArgument("symmetric matrix: N must be positive");
  check_size(n, n, limits);
  Matrix a(n, n);
  const double sd = std::sqrt(1.0 / (2.0 * n));
  std::normal_distribution<double> normal;
  // Row i of G drawn from its own stream; stored transposed (column i) for locality.
  for (int i = 0; i < n; ++i) {
    auto rng = make_stream(seed, {2, static_cast<std::uint64_t>(i)});
    for (int j = 0; j < n; ++j) a(j, i) = sd * normal(rng);
  }
  for (int j = 0; j < n; ++j) {
    a(j, j) *= 2.0;
    for (int i = j + 1; i < n; ++i) {
      const double s = a(i, j) + a(j, i);
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  return a;
}

Matrix sample_gaussian_matrix(int rows, int cols, double variance, std::uint64_t seed,
                              const SamplingLimits& limits) {
  if (rows < 1 || cols < 1) throw InvalidArgument("gaussian matrix: dimensions must be positive");
  if (!(variance >= 0.0)) throw InvalidArgument("gaussian matrix: negative variance");
  check_size(rows, cols, limits);
  Matrix a(rows, cols);
  const double sd = std::sqrt(variance);
  std::normal_distribution<double> normal;
  for (int i = 0; i < rows; ++i) {
    auto rng = make_stream(seed, {3, static_cast<std::uint64_t>(i)});
    for (int j = 0; j < cols; ++j) a(i, j) = sd * normal(rng);
  }
  return a;
}

}  // namespace ampse
