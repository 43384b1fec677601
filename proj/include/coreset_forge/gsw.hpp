#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dataset.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "random.hpp"

namespace coreset_forge {

/// Inner products <phi(x_i), phi(x_j)> = K(x_i, x_j) of the implicit unit
/// feature vectors, backed by the dense Gram matrix.
class GramOracle {
public:
  GramOracle(const KernelSpec& spec, const DataSet& ds) : gram_(ds.size(), ds.size()) {
    if (ds.domain() != spec.domain())
      throw DomainError("dataset domain " + std::string(to_string(ds.domain())) + " does not match kernel " +
                        std::string(to_string(spec.family)));
    const auto n = static_cast<Eigen::Index>(ds.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      gram_(j, j) = 1.0;
      const auto xj = ds.point(static_cast<std::size_t>(j));
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double k = detail::evaluate_unchecked(spec, ds.point(static_cast<std::size_t>(i)), xj);
        gram_(i, j) = k;
        gram_(j, i) = k;
      }
    }
  }

  /// Wraps an explicit Gram matrix; requires a unit diagonal and symmetry.
  explicit GramOracle(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
    if (gram_.rows() != gram_.cols() || gram_.rows() == 0) throw DimensionError("Gram matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < gram_.rows(); ++i) {
      if (std::abs(gram_(i, i) - 1.0) > 1e-12) throw DomainError("Gram diagonal must be 1", static_cast<std::size_t>(i));
      for (Eigen::Index j = 0; j < i; ++j)
        if (gram_(i, j) != gram_(j, i)) throw DomainError("Gram matrix is not symmetric", static_cast<std::size_t>(i));
    }
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(gram_.rows()); }
  double inner(std::size_t i, std::size_t j) const noexcept {
    return gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return gram_; }

private:
  Eigen::MatrixXd gram_;
};

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericsError("eigenvalue solver failed");
  return solver.eigenvalues().minCoeff();
}

enum class ColoringAlgorithm { gsw, random, exhaustive };

inline std::string_view to_string(ColoringAlgorithm a) noexcept {
  switch (a) {
  case ColoringAlgorithm::gsw: return "gsw";
  case ColoringAlgorithm::random: return "random";
  case ColoringAlgorithm::exhaustive: return "exhaustive";
  }
  return "gsw";
}

/// A +-1 sign per dataset index.
struct Coloring {
  std::vector<std::int8_t> signs;
  std::uint64_t seed = 0;
  ColoringAlgorithm algorithm = ColoringAlgorithm::gsw;

  std::size_t size() const noexcept { return signs.size(); }
  std::size_t plus_count() const noexcept {
    return static_cast<std::size_t>(std::count(signs.begin(), signs.end(), std::int8_t{1}));
  }
  Coloring negated() const {
    Coloring c = *this;
    for (auto& s : c.signs) s = static_cast<std::int8_t>(-s);
    return c;
  }

  friend bool operator==(const Coloring&, const Coloring&) = default;
};

/// Uniform random signs; the trivial baseline.
inline Coloring random_coloring(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Coloring c{std::vector<std::int8_t>(n), seed, ColoringAlgorithm::random};
  for (auto& s : c.signs) s = rng.bernoulli(0.5) ? 1 : -1;
  return c;
}

namespace detail {

/// Cholesky factor of (G[S,S] + lambda I) for an ordered index set S that
/// only ever shrinks. Deleting a member costs O(|S|^2) via Givens rotations.
class ShrinkingCholesky {
public:
  ShrinkingCholesky(const Eigen::MatrixXd& gram, std::vector<std::size_t> members, double lambda)
      : members_(std::move(members)), stride_(members_.size()), l_(stride_ * stride_, 0.0) {
    const auto k = static_cast<Eigen::Index>(members_.size());
    if (k == 0) return;
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < k; ++i)
        sub(i, j) = gram(static_cast<Eigen::Index>(members_[i]), static_cast<Eigen::Index>(members_[j]));
    sub.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(std::move(sub));
    if (llt.info() != Eigen::Success) throw NumericsError("regularized Gram block is not positive definite");
    const auto& factor = llt.matrixLLT();
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) l_[static_cast<std::size_t>(i) * stride_ + static_cast<std::size_t>(j)] = factor(i, j);
  }

  const std::vector<std::size_t>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }

  void remove(std::size_t global_index) {
    const auto it = std::find(members_.begin(), members_.end(), global_index);
    if (it == members_.end()) return;
    const auto r = static_cast<std::ptrdiff_t>(it - members_.begin());
    const auto k = static_cast<std::ptrdiff_t>(members_.size());
    members_.erase(it);
    double* base = l_.data();
    const auto stride = static_cast<std::ptrdiff_t>(stride_);
    // Drop row r; each later row then carries one superdiagonal entry, which
    // rotations on column pairs (j, j+1) chase off. Rotation j depends only on
    // row j after rotations r..j-1, so rows are finished one at a time.
    cos_.resize(static_cast<std::size_t>(k));
    sin_.resize(static_cast<std::size_t>(k));
    for (std::ptrdiff_t i = r; i + 1 < k; ++i) {
      double* row = base + i * stride;
      std::copy_n(base + (i + 1) * stride, i + 2, row);
      for (std::ptrdiff_t j = r; j < i; ++j) {
        const double c = cos_[j];
        const double s = sin_[j];
        const double p = row[j];
        const double q = row[j + 1];
        row[j] = c * p + s * q;
        row[j + 1] = -s * p + c * q;
      }
      const double a = row[i];
      const double b = row[i + 1];
      const double h = std::hypot(a, b);
      if (!(h > 0.0)) throw NumericsError("Cholesky downdate lost positive definiteness");
      cos_[i] = a / h;
      sin_[i] = b / h;
      row[i] = h;
      row[i + 1] = 0.0;
    }
  }

  /// Solves (G[S,S] + lambda I) x = b in place.
  void solve(std::vector<double>& b) const {
    const auto k = static_cast<std::ptrdiff_t>(members_.size());
    using Factor = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>, 0,
                              Eigen::OuterStride<>>;
    const Factor factor(l_.data(), k, k, Eigen::OuterStride<>(static_cast<Eigen::Index>(stride_)));
    Eigen::Map<Eigen::VectorXd> x(b.data(), k);
    factor.triangularView<Eigen::Lower>().solveInPlace(x);
    factor.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    for (std::ptrdiff_t i = 0; i < k; ++i)
      if (!std::isfinite(b[i])) throw NumericsError("least-squares solve produced a non-finite value");
  }

private:
  std::vector<std::size_t> members_;
  // Row-major with a fixed stride so row copies and triangular solves walk
  // contiguous memory and deletions never reallocate.
  std::size_t stride_;
  std::vector<double> l_;
  std::vector<double> cos_, sin_;
};

} // namespace detail

struct WalkStats {
  std::size_t steps = 0;
  std::size_t pivot_changes = 0;
};

/// Options of the walk; defaults follow the library contract.
struct WalkOptions {
  double lambda_per_point = 1e-10;  ///< Tikhonov lambda = lambda_per_point * n.
  double snap_tolerance = 1e-12;    ///< |z_i| within this of 1 freezes to +-1.
};

/// Gram-Schmidt walk on the implicit unit vectors of `oracle`.
///
/// A fractional coloring z starts at 0. The pivot is the alive index that
/// appears last in a random permutation drawn once up front. Each step moves
/// z along u with u_pivot = 1 and the other alive coordinates minimizing
/// |sum_i u_i phi(x_i)|, by a random signed length chosen so that E[step] = 0
/// and at least one coordinate reaches +-1.
inline Coloring gram_schmidt_walk(const GramOracle& oracle, std::uint64_t seed,
                                  WalkStats* stats = nullptr, const WalkOptions& options = {}) {
  const std::size_t n = oracle.size();
  if (n == 0) throw SizeError("walk needs at least one vector");
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order), rng);

  std::vector<double> z(n, 0.0);
  std::vector<char> alive(n, 1);
  std::size_t alive_count = n;
  // Walk the permutation from the back; the pivot is the last alive entry.
  std::size_t cursor = n;
  auto next_pivot = [&]() {
    while (cursor > 0 && !alive[order[cursor - 1]]) --cursor;
    return order[cursor - 1];
  };
  std::size_t pivot = next_pivot();

  std::vector<std::size_t> rest;
  rest.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != pivot) rest.push_back(i);
  const double lambda = options.lambda_per_point * static_cast<double>(n);
  detail::ShrinkingCholesky chol(oracle.matrix(), std::move(rest), lambda);

  WalkStats local;
  std::vector<double> u(n, 0.0);
  std::vector<double> rhs;

  auto freeze = [&](std::size_t i, double sign) {
    z[i] = sign;
    alive[i] = 0;
    --alive_count;
    if (i != pivot) chol.remove(i);
  };

  while (alive_count > 0) {
    if (!alive[pivot]) {
      pivot = next_pivot();
      chol.remove(pivot);
      ++local.pivot_changes;
    }

    // Direction: u_p = 1, u_rest = -(G_rr + lambda I)^{-1} G_rp.
    const auto& members = chol.members();
    rhs.resize(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) rhs[a] = -oracle.inner(members[a], pivot);
    chol.solve(rhs);
    std::fill(u.begin(), u.end(), 0.0);
    u[pivot] = 1.0;
    for (std::size_t a = 0; a < members.size(); ++a) u[members[a]] = rhs[a];

    // Largest steps keeping z + delta u and z - delta u inside the cube.
    double up = std::numeric_limits<double>::infinity();
    double down = std::numeric_limits<double>::infinity();
    std::size_t up_arg = pivot;
    std::size_t down_arg = pivot;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || u[i] == 0.0) continue;
      const double to_plus = (1.0 - z[i]) / std::abs(u[i]);
      const double to_minus = (1.0 + z[i]) / std::abs(u[i]);
      const double a = u[i] > 0.0 ? to_plus : to_minus;
      const double b = u[i] > 0.0 ? to_minus : to_plus;
      if (a < up) { up = a; up_arg = i; }
      if (b < down) { down = b; down_arg = i; }
    }

    if (up <= 0.0 && down <= 0.0) {
      // Pivot already on the boundary: freeze without a step.
      freeze(pivot, z[pivot] >= 0.0 ? 1.0 : -1.0);
      continue;
    }

    const bool go_up = rng.uniform() * (up + down) < down;
    const double delta = go_up ? up : -down;
    const std::size_t hit = go_up ? up_arg : down_arg;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i] && u[i] != 0.0) z[i] += delta * u[i];
    ++local.steps;

    // The coordinate that defined the step lands exactly on the boundary.
    const double hit_sign = (delta * u[hit] > 0.0) ? 1.0 : -1.0;
    freeze(hit, hit_sign);
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      if (std::abs(z[i]) >= 1.0 - options.snap_tolerance) freeze(i, z[i] > 0.0 ? 1.0 : -1.0);
    }
  }

  if (stats) *stats = local;
  Coloring out{std::vector<std::int8_t>(n), seed, ColoringAlgorithm::gsw};
  for (std::size_t i = 0; i < n; ++i) out.signs[i] = z[i] > 0.0 ? 1 : -1;
  return out;
}

/// |sum_i beta_i phi(x_i)|_H = sqrt(beta^T G beta).
inline double signed_sum_norm(const GramOracle& oracle, const Coloring& coloring) {
  if (coloring.size() != oracle.size()) throw DimensionError("coloring length does not match the Gram matrix");
  Eigen::VectorXd beta(static_cast<Eigen::Index>(coloring.size()));
  for (std::size_t i = 0; i < coloring.size(); ++i) beta[static_cast<Eigen::Index>(i)] = coloring.signs[i];
  const double q = beta.dot(oracle.matrix() * beta);
  if (q < 0.0) {
    if (q < -1e-9) throw NumericsError("negative quadratic form; Gram matrix is not PSD");
    return 0.0;
  }
  return std::sqrt(q);
}

/// Smallest c with P[|S_y| >= t] <= 2 exp(-t^2 / c^2) at t in {1, 2, 3} for
/// every query row, where S_y = sum_i beta_i K(x_i, y) and beta ranges over
/// `runs` independent walks. Zero when no tail event is observed.
inline double subgaussian_diagnostic(const GramOracle& oracle, std::span<const std::vector<double>> query_rows,
                                     std::size_t runs, std::uint64_t seed) {
  if (runs < 100) throw ParamError("subgaussian diagnostic needs at least 100 runs");
  const std::size_t n = oracle.size();
  for (const auto& row : query_rows)
    if (row.size() != n) throw DimensionError("query row length does not match the Gram matrix");
  constexpr double thresholds[] = {1.0, 2.0, 3.0};
  std::vector<std::size_t> exceed(query_rows.size() * 3, 0);
  for (std::size_t r = 0; r < runs; ++r) {
    const Coloring c = gram_schmidt_walk(oracle, derive_seed(seed, r));
    for (std::size_t q = 0; q < query_rows.size(); ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c.signs[i] * query_rows[q][i];
      for (std::size_t t = 0; t < 3; ++t)
        if (std::abs(s) >= thresholds[t]) ++exceed[q * 3 + t];
    }
  }
  double c = 0.0;
  for (std::size_t q = 0; q < query_rows.size(); ++q)
    for (std::size_t t = 0; t < 3; ++t) {
      if (exceed[q * 3 + t] == 0) continue;
      const double p = static_cast<double>(exceed[q * 3 + t]) / static_cast<double>(runs);
      c = std::max(c, thresholds[t] / std::sqrt(std::log(2.0 / p)));
    }
  return c;
}

} // namespace coreset_forge
