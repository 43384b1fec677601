#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dataset.hpp"
#include "errors.hpp"
#include "gsw.hpp"
#include "kernels.hpp"
#include "random.hpp"

namespace coreset_forge {

/// Union of radius-r_K(n) balls around the data, split into the connected
/// components of the "balls overlap" graph.
struct QuerySpace {
  double radius = 0.0;
  Domain domain = Domain::euclidean;
  std::vector<std::size_t> component_of;
  std::vector<std::vector<std::size_t>> components;

  std::size_t component_count() const noexcept { return components.size(); }
};

enum class SearchMethod { grid, multistart, exact_candidates };

inline std::string_view to_string(SearchMethod m) noexcept {
  switch (m) {
  case SearchMethod::grid: return "grid";
  case SearchMethod::multistart: return "multistart";
  case SearchMethod::exact_candidates: return "exact_candidates";
  }
  return "grid";
}

inline SearchMethod parse_search_method(std::string_view s) {
  if (s == "grid") return SearchMethod::grid;
  if (s == "multistart") return SearchMethod::multistart;
  if (s == "exact_candidates") return SearchMethod::exact_candidates;
  throw FormatError("unknown search method '" + std::string(s) + "'");
}

/// Best value of |sum_i w_i K(x_i, y)| found by a search, with its witness.
/// The value is a lower bound on the supremum.
struct DiscrepancyReport {
  double sup_discrepancy = 0.0;
  Point witness;
  std::size_t evaluations = 0;
  SearchMethod method = SearchMethod::exact_candidates;

  friend bool operator==(const DiscrepancyReport&, const DiscrepancyReport&) = default;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline void check_query(const KernelSpec& spec, const DataSet& ds, PointView y) {
  if (y.size() != ds.dim()) throw DimensionError("query dimension does not match the dataset");
  if (!in_domain(spec.domain(), y))
    throw DomainError("query point outside the " + std::string(to_string(spec.domain())) + " domain");
}

inline void check_dataset(const KernelSpec& spec, const DataSet& ds) {
  if (ds.domain() != spec.domain())
    throw DomainError("dataset domain " + std::string(to_string(ds.domain())) + " does not match kernel " +
                      std::string(to_string(spec.family)));
}

/// sum_i w_i K(x_i, y) by the scalar reference path.
inline double signed_sum_exact(const KernelSpec& spec, const DataSet& ds, std::span<const double> w, PointView y) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (w[i] != 0.0) s += w[i] * evaluate_unchecked(spec, ds.point(i), y);
  return s;
}

} // namespace detail

/// Batched y -> sum_i w_i K(x_i, y), vectorizing the exponentials through
/// Eigen. Holds scratch space, so one instance per thread.
class SignedSumEvaluator {
public:
  SignedSumEvaluator(const KernelSpec& spec, const DataSet& ds, std::span<const double> weights)
      : spec_(spec), ds_(ds), weights_(weights.begin(), weights.end()),
        exponents_(static_cast<Eigen::Index>(ds.size())) {
    if (weights.size() != ds.size()) throw DimensionError("weight count does not match the dataset");
    if (spec.family == KernelFamily::hellinger) {
      mapped_.resize(ds.coords().size());
      for (std::size_t k = 0; k < mapped_.size(); ++k) mapped_[k] = std::sqrt(std::max(ds.coords()[k], 0.0));
    }
  }

  double operator()(PointView y) {
    ++evaluations_;
    const std::size_t n = ds_.size();
    const std::size_t d = ds_.dim();
    const double* x = ds_.coords().data();
    double* e = exponents_.data();
    switch (spec_.family) {
    case KernelFamily::gaussian: {
      for (std::size_t i = 0; i < n; ++i) {
        const double z = spec_.alpha * std::sqrt(sqdist(x + i * d, y.data(), d));
        e[i] = -z * z;
      }
      break;
    }
    case KernelFamily::laplacian:
      for (std::size_t i = 0; i < n; ++i) e[i] = -spec_.alpha * std::sqrt(sqdist(x + i * d, y.data(), d));
      break;
    case KernelFamily::exponential:
      for (std::size_t i = 0; i < n; ++i) e[i] = -0.5 * spec_.alpha * sqdist(x + i * d, y.data(), d);
      break;
    case KernelFamily::hellinger: {
      root_.resize(d);
      for (std::size_t k = 0; k < d; ++k) root_[k] = std::sqrt(std::max(y[k], 0.0));
      for (std::size_t i = 0; i < n; ++i) e[i] = -spec_.alpha * sqdist(mapped_.data() + i * d, root_.data(), d);
      break;
    }
    case KernelFamily::js:
      for (std::size_t i = 0; i < n; ++i) e[i] = -spec_.alpha * detail::entropy_gap_unchecked(ds_.point(i), y);
      break;
    }
    exponents_ = exponents_.exp();
    return (exponents_ * Eigen::Map<const Eigen::ArrayXd>(weights_.data(), static_cast<Eigen::Index>(n))).sum();
  }

  /// Reference value at y through the scalar kernel path.
  double exact(PointView y) const { return detail::signed_sum_exact(spec_, ds_, weights_, y); }

  std::size_t evaluations() const noexcept { return evaluations_; }
  const DataSet& dataset() const noexcept { return ds_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  std::span<const double> weights() const noexcept { return weights_; }

private:
  static double sqdist(const double* a, const double* b, std::size_t d) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = a[k] - b[k];
      s += t * t;
    }
    return s;
  }

  KernelSpec spec_;
  const DataSet& ds_;
  std::vector<double> weights_;
  std::vector<double> mapped_;
  std::vector<double> root_;
  Eigen::ArrayXd exponents_;
  std::size_t evaluations_ = 0;
};

inline std::vector<double> coloring_weights(const Coloring& coloring) {
  return {coloring.signs.begin(), coloring.signs.end()};
}

/// disc_K(X, beta, y) = |sum_x beta(x) K(x, y)|.
inline double point_discrepancy(const KernelSpec& spec, const DataSet& ds, const Coloring& coloring, PointView y) {
  detail::check_dataset(spec, ds);
  if (coloring.size() != ds.size()) throw DimensionError("coloring length does not match the dataset");
  detail::check_query(spec, ds, y);
  const auto w = coloring_weights(coloring);
  return std::abs(detail::signed_sum_exact(spec, ds, w, y));
}

// ---------------------------------------------------------------------------
// Query space

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace detail

/// Radius r_K(n) and the single-linkage components at distance 2 r_K.
inline QuerySpace build_query_space(const KernelSpec& spec, const DataSet& ds) {
  detail::check_dataset(spec, ds);
  const std::size_t n = ds.size();
  if (n < 2) throw ParamError("query space needs n >= 2");
  QuerySpace qs;
  qs.radius = impact_radius(spec, n);
  qs.domain = ds.domain();
  detail::DisjointSets sets(n);
  const double link = 2.0 * qs.radius;
  if (has_compact_domain(spec.family)) {
    for (std::size_t i = 1; i < n; ++i) sets.unite(0, i);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (sets.find(i) != sets.find(j) && query_metric(spec.family, ds.point(i), ds.point(j)) <= link)
          sets.unite(i, j);
  }
  qs.component_of.assign(n, 0);
  std::vector<std::size_t> label(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (label[root] == static_cast<std::size_t>(-1)) {
      label[root] = qs.components.size();
      qs.components.emplace_back();
    }
    qs.component_of[i] = label[root];
    qs.components[label[root]].push_back(i);
  }
  return qs;
}

// ---------------------------------------------------------------------------
// Supremum search

struct SearchOptions {
  bool grid = true;                 ///< Regular grid over each component (use for d <= 3).
  std::size_t climbs = 0;           ///< Multistart coordinate-ascent climbs.
  std::size_t climb_iterations = 40;
  std::uint64_t seed = 0;
  std::size_t max_grid_points = std::size_t{1} << 18;
  std::span<const Point> extra_candidates{};
};

namespace detail {

struct SearchState {
  double best = -1.0;
  Point witness;

  void offer(double value, PointView y) {
    if (value > best) {
      best = value;
      witness.assign(y.begin(), y.end());
    }
  }
};

inline bool within_component(const KernelSpec& spec, const DataSet& ds, const std::vector<std::size_t>& members,
                             PointView y, double radius) noexcept {
  for (std::size_t i : members)
    if (query_metric(spec.family, ds.point(i), y) <= radius) return true;
  return false;
}

/// Calls `visit(point)` for every node of a grid of the given spacing over
/// the component's bounding box grown by `radius`, clipped to the domain box.
template <class Visit>
void for_each_grid_point(const DataSet& ds, const std::vector<std::size_t>& members, double radius, double spacing,
                         Visit&& visit) {
  const std::size_t d = ds.dim();
  Point lo(d, std::numeric_limits<double>::infinity());
  Point hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i : members) {
    const auto p = ds.point(i);
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] -= radius;
    hi[k] += radius;
    if (ds.domain() == Domain::sphere) {
      lo[k] = std::max(lo[k], -1.0);
      hi[k] = std::min(hi[k], 1.0);
    } else if (ds.domain() == Domain::simplex) {
      lo[k] = std::max(lo[k], 0.0);
      hi[k] = std::min(hi[k], 1.0);
    }
  }
  std::vector<std::size_t> counts(d);
  for (std::size_t k = 0; k < d; ++k)
    counts[k] = static_cast<std::size_t>(std::floor((hi[k] - lo[k]) / spacing)) + 1;
  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  for (;;) {
    for (std::size_t k = 0; k < d; ++k) y[k] = lo[k] + spacing * static_cast<double>(idx[k]);
    visit(static_cast<const Point&>(y));
    std::size_t k = 0;
    while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == d) break;
  }
}

inline std::size_t grid_size(const DataSet& ds, const std::vector<std::size_t>& members, double radius,
                             double spacing) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < ds.dim(); ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : members) {
      lo = std::min(lo, ds.point(i)[k]);
      hi = std::max(hi, ds.point(i)[k]);
    }
    const double extent = (hi - lo) + 2.0 * radius;
    const double c = std::floor(extent / spacing) + 1.0;
    if (c > 1e12 || static_cast<double>(total) * c > 1e15) return std::numeric_limits<std::size_t>::max();
    total *= static_cast<std::size_t>(c);
  }
  return total;
}

/// Coordinate ascent on |f| from `start`: try +-step along each axis, accept
/// the first improvement, halve the step when no axis improves.
inline void climb(SignedSumEvaluator& f, Point y, double step, std::size_t iterations, Domain domain,
                  SearchState& state) {
  project_to_domain(domain, y);
  double value = std::abs(f(y));
  state.offer(value, y);
  Point trial(y.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    bool improved = false;
    for (std::size_t k = 0; k < y.size() && !improved; ++k) {
      for (double dir : {1.0, -1.0}) {
        trial = y;
        trial[k] += dir * step;
        project_to_domain(domain, trial);
        const double v = std::abs(f(trial));
        if (v > value) {
          value = v;
          y.swap(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  state.offer(value, y);
}

} // namespace detail

/// Maximizes |sum_i w_i K(x_i, y)| over candidates: every data point, the
/// extra candidates, a grid over each component (optional) and multistart
/// climbs from perturbed data points. The reported value is recomputed at
/// the witness on the scalar path.
inline DiscrepancyReport maximize_signed_sum(const KernelSpec& spec, const DataSet& ds, std::span<const double> weights,
                                             const QuerySpace& qs, const SearchOptions& options) {
  detail::check_dataset(spec, ds);
  SignedSumEvaluator f(spec, ds, weights);
  detail::SearchState state;
  const Domain domain = ds.domain();

  for (std::size_t i = 0; i < ds.size(); ++i) state.offer(std::abs(f(ds.point(i))), ds.point(i));
  for (const auto& c : options.extra_candidates) {
    detail::check_query(spec, ds, c);
    state.offer(std::abs(f(c)), c);
  }

  SearchMethod method = SearchMethod::exact_candidates;
  if (options.grid) {
    method = SearchMethod::grid;
    const bool compact = has_compact_domain(spec.family);
    for (const auto& members : qs.components) {
      double spacing = qs.radius / 8.0;
      while (detail::grid_size(ds, members, qs.radius, spacing) > options.max_grid_points) spacing *= 2.0;
      Point projected(ds.dim());
      detail::for_each_grid_point(ds, members, qs.radius, spacing, [&](const Point& y) {
        if (compact) {
          projected = y;
          project_to_domain(domain, projected);
          state.offer(std::abs(f(projected)), projected);
        } else if (detail::within_component(spec, ds, members, y, qs.radius)) {
          state.offer(std::abs(f(y)), y);
        }
      });
    }
  }

  if (options.climbs > 0) {
    method = SearchMethod::multistart;
    Rng rng(options.seed);
    const double step = qs.radius / 8.0;
    const double jitter = qs.radius / 4.0;
    for (std::size_t c = 0; c < options.climbs; ++c) {
      const auto origin = ds.point(static_cast<std::size_t>(rng.below(ds.size())));
      Point start(origin.begin(), origin.end());
      for (double& v : start) v += jitter * rng.normal();
      detail::climb(f, std::move(start), step, options.climb_iterations, domain, state);
    }
  }

  DiscrepancyReport report;
  report.witness = state.witness;
  report.sup_discrepancy = std::abs(f.exact(state.witness));
  report.evaluations = f.evaluations();
  report.method = method;
  return report;
}

/// Estimated sup over the query space of the coloring's discrepancy. Data
/// points always; a grid of spacing r_K/8 when d <= 3, otherwise `budget`
/// multistart climbs. A certified lower bound on the true supremum.
inline DiscrepancyReport sup_discrepancy(const KernelSpec& spec, const DataSet& ds, const Coloring& coloring,
                                         const QuerySpace& qs, std::size_t budget, std::uint64_t seed) {
  if (coloring.size() != ds.size()) throw DimensionError("coloring length does not match the dataset");
  if (budget < ds.size())
    throw BudgetError("query budget " + std::to_string(budget) + " is below n = " + std::to_string(ds.size()));
  SearchOptions options;
  options.grid = ds.dim() <= 3;
  options.climbs = ds.dim() <= 3 ? 0 : budget;
  options.seed = seed;
  const auto w = coloring_weights(coloring);
  return maximize_signed_sum(spec, ds, w, qs, options);
}

/// max over `queries` of point_discrepancy.
inline double max_candidate_discrepancy(const KernelSpec& spec, const DataSet& ds, const Coloring& coloring,
                                        std::span<const Point> queries) {
  double best = 0.0;
  for (const auto& q : queries) best = std::max(best, point_discrepancy(spec, ds, coloring, q));
  return best;
}

// ---------------------------------------------------------------------------
// Exact oracle

struct ExactMinimum {
  Coloring coloring;
  double value = 0.0;
};

inline constexpr std::size_t exact_max_points = 16;

/// min over colorings (first sign fixed to +1) of the max over `queries` of
/// the point discrepancy, by enumeration. Ties go to the lexicographically
/// smallest sign vector (-1 before +1).
inline ExactMinimum exact_min_discrepancy(const KernelSpec& spec, const DataSet& ds, std::span<const Point> queries) {
  detail::check_dataset(spec, ds);
  const std::size_t n = ds.size();
  if (n > exact_max_points) throw SizeError("exact oracle supports n <= 16, got " + std::to_string(n));
  if (queries.empty()) throw ParamError("exact oracle needs at least one candidate query");
  std::vector<std::vector<double>> k(queries.size(), std::vector<double>(n));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    detail::check_query(spec, ds, queries[q]);
    for (std::size_t i = 0; i < n; ++i) k[q][i] = detail::evaluate_unchecked(spec, ds.point(i), queries[q]);
  }
  // Bit (n-2-j) of the mask is sign j+1, so increasing masks are
  // lexicographically increasing sign vectors.
  const std::uint32_t total = std::uint32_t{1} << (n - 1);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  std::vector<double> signs(n, 1.0);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    for (std::size_t j = 1; j < n; ++j) signs[j] = (mask >> (n - 1 - j)) & 1u ? 1.0 : -1.0;
    double worst = 0.0;
    for (const auto& row : k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += signs[i] * row[i];
      worst = std::max(worst, std::abs(s));
      if (worst >= best) break;
    }
    if (mask == 0 || worst < best - 1e-12 * std::max(1.0, best)) {
      best = worst;
      best_mask = mask;
    }
  }
  ExactMinimum out;
  out.coloring = Coloring{std::vector<std::int8_t>(n, 1), 0, ColoringAlgorithm::exhaustive};
  for (std::size_t j = 1; j < n; ++j) out.coloring.signs[j] = (best_mask >> (n - 1 - j)) & 1u ? 1 : -1;
  out.value = best;
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz upper bound (d <= 3, radial kernels on R^d)

struct CertifiedBound {
  double upper_bound = 0.0;  ///< Valid upper bound on sup over the query space.
  double grid_max = 0.0;
  double spacing = 0.0;
  bool slack_within_target = false;  ///< Lipschitz slack <= 5% of grid_max.
};

/// Upper bound on sup_{y in Q} |sum_i w_i K(x_i, y)| from a full grid over
/// each component box: grid max + L h sqrt(d) with
/// L = sum |w_i| * scale * sup|kappa'|. The spacing halves from r_K/8 until
/// the slack is within 5% of the grid max or the grid would exceed
/// `max_grid_points`.
inline CertifiedBound certified_sup_bound(const KernelSpec& spec, const DataSet& ds, std::span<const double> weights,
                                          const QuerySpace& qs, std::size_t max_grid_points = std::size_t{1} << 20) {
  if (ds.dim() > 3) throw UnsupportedError("certified bound is offered for d <= 3 only");
  const auto profile = radial_profile(spec);
  if (!profile || ds.domain() != Domain::euclidean)
    throw UnsupportedError("certified bound needs a radial kernel on R^d");
  SignedSumEvaluator f(spec, ds, weights);
  double mass = 0.0;
  for (double w : weights) mass += std::abs(w);
  const double lipschitz = mass * profile->scale * profile->kappa_lipschitz();
  // The last node along an axis may sit up to one spacing short of the box edge.
  const double reach = std::sqrt(static_cast<double>(ds.dim()));

  CertifiedBound out;
  double spacing = qs.radius / 8.0;
  for (;;) {
    std::size_t points = 0;
    for (const auto& members : qs.components) points += detail::grid_size(ds, members, qs.radius, spacing);
    double grid_max = 0.0;
    for (const auto& members : qs.components)
      detail::for_each_grid_point(ds, members, qs.radius, spacing,
                                  [&](const Point& y) { grid_max = std::max(grid_max, std::abs(f(y))); });
    const double slack = lipschitz * spacing * reach;
    out = {grid_max + slack, grid_max, spacing, slack <= 0.05 * grid_max};
    std::size_t next = 0;
    for (const auto& members : qs.components) next += detail::grid_size(ds, members, qs.radius, spacing / 2.0);
    if (out.slack_within_target || next > max_grid_points || points == next) break;
    spacing /= 2.0;
  }
  return out;
}

} // namespace coreset_forge
