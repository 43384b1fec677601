#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "gsw.hpp"
#include "kernels.hpp"
#include "random.hpp"

namespace coreset_forge {

/// One halving level.
struct LevelRecord {
  std::size_t n_before = 0;
  double sup_discrepancy = 0.0;  ///< Measured after rebalancing.
  Point witness;
  std::size_t rebalance_flips = 0;
  // Partitioned levels only.
  std::size_t cells = 0;
  std::vector<std::size_t> cell_rounds;  ///< Walks run per cell.
  std::size_t exhausted_cells = 0;       ///< Cells that never met the threshold.

  friend bool operator==(const LevelRecord&, const LevelRecord&) = default;
};

struct CoresetResult {
  std::string dataset_id;
  RunConfig config;
  std::vector<std::size_t> indices;  ///< Surviving indices into the input, increasing.
  std::vector<LevelRecord> levels;
  double error_estimate = 0.0;  ///< sum_s 2^(s-1)/n * f_s over levels s = 1..t.
  double wall_ms = 0.0;         ///< Filled by callers that time the run.

  friend bool operator==(const CoresetResult&, const CoresetResult&) = default;
};

struct HalvingStep {
  std::vector<std::size_t> kept;  ///< Indices into the halved dataset, increasing.
  LevelRecord record;
};

// ---------------------------------------------------------------------------
// KDE helpers

/// KDE_X(y) = (1/n) sum_i K(x_i, y).
inline double kde_value(const KernelSpec& spec, const DataSet& ds, PointView y) {
  detail::check_dataset(spec, ds);
  detail::check_query(spec, ds, y);
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) s += detail::evaluate_unchecked(spec, ds.point(i), y);
  return s / static_cast<double>(ds.size());
}

/// KDE of the sub-multiset X[indices].
inline double kde_value(const KernelSpec& spec, const DataSet& ds, std::span<const std::size_t> indices, PointView y) {
  if (indices.empty()) throw SizeError("KDE of an empty subset");
  detail::check_dataset(spec, ds);
  detail::check_query(spec, ds, y);
  double s = 0.0;
  for (std::size_t i : indices) s += detail::evaluate_unchecked(spec, ds.point(i), y);
  return s / static_cast<double>(indices.size());
}

/// Weights w with sum_i w_i K(x_i, y) = KDE_X(y) - KDE_Q(y).
inline std::vector<double> kde_difference_weights(std::size_t n, std::span<const std::size_t> indices) {
  if (indices.empty()) throw SizeError("coreset must be nonempty");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const double m = static_cast<double>(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= n) throw DimensionError("coreset index out of range");
    if (k > 0 && indices[k] <= indices[k - 1]) throw ParamError("coreset indices must be strictly increasing");
    w[indices[k]] -= 1.0 / m;
  }
  return w;
}

/// Measured sup_y |KDE_X(y) - KDE_Q(y)|: data points, a grid when d <= 3,
/// and `climbs` multistart climbs. A lower bound on the true sup-norm error.
inline DiscrepancyReport measure_kde_error(const KernelSpec& spec, const DataSet& ds,
                                           std::span<const std::size_t> indices, std::size_t climbs,
                                           std::uint64_t seed) {
  const auto w = kde_difference_weights(ds.size(), indices);
  if (ds.size() < 2) return DiscrepancyReport{0.0, Point(ds.point(0).begin(), ds.point(0).end()), 0,
                                              SearchMethod::exact_candidates};
  const QuerySpace qs = build_query_space(spec, ds);
  SearchOptions options;
  options.grid = ds.dim() <= 3;
  options.climbs = climbs;
  options.seed = seed;
  return maximize_signed_sum(spec, ds, w, qs, options);
}

// ---------------------------------------------------------------------------
// Halving

/// Flips uniformly chosen majority-side signs until the +1 side holds
/// ceil(n/2) entries. Returns the number of flips.
inline std::size_t rebalance_coloring(Coloring& coloring, std::uint64_t seed) {
  const std::size_t n = coloring.size();
  const std::size_t target = (n + 1) / 2;
  const std::size_t plus = coloring.plus_count();
  if (plus == target) return 0;
  const std::int8_t from = plus > target ? 1 : -1;
  const std::size_t flips = plus > target ? plus - target : target - plus;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (coloring.signs[i] == from) pool.push_back(i);
  Rng rng(seed);
  for (std::size_t k = 0; k < flips; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[j]);
    coloring.signs[pool[k]] = static_cast<std::int8_t>(-from);
  }
  return flips;
}

namespace detail {

inline std::vector<std::size_t> plus_side(const Coloring& c) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.signs[i] == 1) kept.push_back(i);
  return kept;
}

} // namespace detail

/// Colors with the Gram-Schmidt walk, rebalances, keeps the +1 side and
/// records the post-rebalance discrepancy estimate.
inline HalvingStep halve_once(const KernelSpec& spec, const DataSet& ds, std::uint64_t seed, std::size_t query_budget) {
  if (ds.size() < 2) throw SizeError("halving needs at least two points");
  const GramOracle oracle(spec, ds);
  Coloring coloring = gram_schmidt_walk(oracle, derive_seed(seed, 0));
  HalvingStep step;
  step.record.n_before = ds.size();
  step.record.rebalance_flips = rebalance_coloring(coloring, derive_seed(seed, 1));
  const QuerySpace qs = build_query_space(spec, ds);
  auto report = sup_discrepancy(spec, ds, coloring, qs, query_budget, derive_seed(seed, 2));
  step.record.sup_discrepancy = report.sup_discrepancy;
  step.record.witness = std::move(report.witness);
  step.kept = detail::plus_side(coloring);
  return step;
}

// ---------------------------------------------------------------------------
// Cell partition

struct CellPartition {
  std::vector<std::size_t> center_indices;  ///< Dataset indices of the centers q_1..q_m.
  std::vector<std::size_t> assignment;      ///< Point -> position in center_indices.
  double cell_radius = 0.0;

  std::size_t cell_count() const noexcept { return center_indices.size(); }

  std::vector<std::vector<std::size_t>> cells() const {
    std::vector<std::vector<std::size_t>> out(center_indices.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
  }
};

/// Greedy maximal r_K-separated centers over a seeded random order; every
/// point joins its nearest center (ties to the lower center position).
inline CellPartition build_partition(const KernelSpec& spec, const DataSet& ds, std::uint64_t seed = 0) {
  if (spec.family != KernelFamily::gaussian && spec.family != KernelFamily::laplacian)
    throw UnsupportedError("cell partition needs a radial kernel on R^d (gaussian or laplacian)");
  detail::check_dataset(spec, ds);
  const std::size_t n = ds.size();
  CellPartition p;
  p.cell_radius = impact_radius(spec, std::max<std::size_t>(n, 2));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  for (std::size_t i : order) {
    bool separated = true;
    for (std::size_t c : p.center_indices)
      if (query_metric(spec.family, ds.point(i), ds.point(c)) < p.cell_radius) {
        separated = false;
        break;
      }
    if (separated) p.center_indices.push_back(i);
  }
  p.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p.center_indices.size(); ++c) {
      const double dist = query_metric(spec.family, ds.point(i), ds.point(p.center_indices[c]));
      if (dist < best) {
        best = dist;
        p.assignment[i] = c;
      }
    }
  }
  return p;
}

/// Per-cell acceptance threshold tau = C sqrt(d ln(kappa^-1(1/n)) + 1); the
/// logarithm is floored at 0 for tiny n.
inline double cell_threshold(const KernelSpec& spec, std::size_t n, std::size_t dim, double threshold_constant) {
  const auto profile = radial_profile(spec);
  if (!profile) throw UnsupportedError("cell threshold needs a radial kernel");
  const double reach = profile->kappa_inv(1.0 / static_cast<double>(std::max<std::size_t>(n, 2)));
  const double log_term = reach > 1.0 ? std::log(reach) : 0.0;
  return threshold_constant * std::sqrt(static_cast<double>(dim) * log_term + 1.0);
}

/// One halving level over a cell partition: each cell is colored by its own
/// walk, resampled until its local discrepancy estimate (queries from the
/// cell and cells with centers within 3 r_K) is at most the threshold, then
/// the colorings are joined, rebalanced globally and halved.
inline HalvingStep halve_partitioned(const KernelSpec& spec, const DataSet& ds, const CellPartition& partition,
                                     const RunConfig& config, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n < 2) throw SizeError("halving needs at least two points");
  if (partition.assignment.size() != n) throw DimensionError("partition does not match the dataset");
  const auto cells = partition.cells();
  const double tau = cell_threshold(spec, n, ds.dim(), config.threshold_constant);
  const double horizon = 3.0 * partition.cell_radius;

  HalvingStep step;
  step.record.n_before = n;
  step.record.cells = cells.size();
  step.record.cell_rounds.assign(cells.size(), 0);
  Coloring global{std::vector<std::int8_t>(n, 1), seed, ColoringAlgorithm::gsw};

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& members = cells[c];
    if (members.empty()) continue;
    const DataSet cell = ds.subset(members);
    const GramOracle oracle(spec, cell);

    std::vector<Point> neighbourhood;
    const auto center = ds.point(partition.center_indices[c]);
    for (std::size_t other = 0; other < cells.size(); ++other) {
      if (query_metric(spec.family, center, ds.point(partition.center_indices[other])) > horizon) continue;
      for (std::size_t i : cells[other]) neighbourhood.emplace_back(ds.point(i).begin(), ds.point(i).end());
    }

    QuerySpace local;
    local.radius = partition.cell_radius;
    local.domain = ds.domain();
    local.component_of.assign(members.size(), 0);
    local.components.emplace_back(members.size());
    std::iota(local.components[0].begin(), local.components[0].end(), std::size_t{0});

    SearchOptions options;
    options.grid = ds.dim() <= 3;
    options.climbs =
        ds.dim() <= 3 ? 0 : std::max(members.size(), config.query_budget * members.size() / std::max<std::size_t>(n, 1));
    options.extra_candidates = neighbourhood;

    const std::uint64_t cell_seed = derive_seed(seed, 1000 + c);
    Coloring best;
    double best_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (std::size_t round = 0; round < config.max_rejection_rounds; ++round) {
      const std::uint64_t round_seed = derive_seed(cell_seed, round);
      Coloring coloring = gram_schmidt_walk(oracle, round_seed);
      options.seed = derive_seed(round_seed, 1);
      const auto w = coloring_weights(coloring);
      const double value = maximize_signed_sum(spec, cell, w, local, options).sup_discrepancy;
      ++step.record.cell_rounds[c];
      if (value < best_value) {
        best_value = value;
        best = std::move(coloring);
      }
      if (value <= tau) {
        accepted = true;
        break;
      }
    }
    if (!accepted) ++step.record.exhausted_cells;
    for (std::size_t k = 0; k < members.size(); ++k) global.signs[members[k]] = best.signs[k];
  }

  step.record.rebalance_flips = rebalance_coloring(global, derive_seed(seed, 1));
  const QuerySpace qs = build_query_space(spec, ds);
  auto report = sup_discrepancy(spec, ds, global, qs, config.query_budget, derive_seed(seed, 2));
  step.record.sup_discrepancy = report.sup_discrepancy;
  step.record.witness = std::move(report.witness);
  step.kept = detail::plus_side(global);
  return step;
}

// ---------------------------------------------------------------------------
// Drivers

/// Iterated halving. With a target size, halves until at most that many
/// points remain. With epsilon, halves while the accumulated estimate stays
/// within epsilon; the level that would exceed it is discarded.
/// `on_level` sees the partial result after every accepted level.
inline CoresetResult build_coreset(const KernelSpec& spec, const DataSet& ds, const RunConfig& config,
                                   const std::function<void(const CoresetResult&)>& on_level = {}) {
  config.validate();
  detail::check_dataset(spec, ds);
  const std::size_t n = ds.size();
  if (config.target_size && *config.target_size > n)
    throw TargetError("target size " + std::to_string(*config.target_size) + " exceeds n = " + std::to_string(n));

  CoresetResult result;
  result.dataset_id = ds.id();
  result.config = config;
  result.indices.resize(n);
  std::iota(result.indices.begin(), result.indices.end(), std::size_t{0});

  DataSet current = ds;
  double weight = 1.0 / static_cast<double>(n);  // 2^(s-1)/n at level s
  for (std::size_t level = 0;; ++level) {
    const std::size_t size = result.indices.size();
    if (size < 2) break;
    if (config.target_size && size <= *config.target_size) break;

    const std::uint64_t level_seed = derive_seed(config.seed, level);
    HalvingStep step = config.partitioned
                           ? halve_partitioned(spec, current, build_partition(spec, current, derive_seed(level_seed, 7)),
                                               config, level_seed)
                           : halve_once(spec, current, level_seed, config.query_budget);

    const double contribution = weight * step.record.sup_discrepancy;
    if (config.epsilon && result.error_estimate + contribution > *config.epsilon) break;

    result.error_estimate += contribution;
    result.levels.push_back(std::move(step.record));
    std::vector<std::size_t> survivors;
    survivors.reserve(step.kept.size());
    for (std::size_t k : step.kept) survivors.push_back(result.indices[k]);
    result.indices = std::move(survivors);
    current = current.subset(step.kept);
    weight *= 2.0;
    if (on_level) on_level(result);
  }
  return result;
}

/// m indices drawn uniformly without replacement, returned increasing.
inline std::vector<std::size_t> uniform_sampling_baseline(const DataSet& ds, std::size_t m, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (m < 1 || m > n) throw TargetError("sample size must lie in [1, n]");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = 0; k < m; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(pool[k], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

} // namespace coreset_forge
