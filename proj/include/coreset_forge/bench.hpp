#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "coreset.hpp"
#include "dataset.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "gsw.hpp"
#include "kernels.hpp"
#include "random.hpp"

namespace coreset_forge {

enum class Generator { uniform_ball, uniform_cube, gaussian_mixture, sphere_uniform, simplex_dirichlet };

inline std::string_view to_string(Generator g) noexcept {
  switch (g) {
  case Generator::uniform_ball: return "uniform_ball";
  case Generator::uniform_cube: return "uniform_cube";
  case Generator::gaussian_mixture: return "gaussian_mixture";
  case Generator::sphere_uniform: return "sphere_uniform";
  case Generator::simplex_dirichlet: return "simplex_dirichlet";
  }
  return "uniform_ball";
}

inline Generator parse_generator(std::string_view s) {
  if (s == "uniform_ball") return Generator::uniform_ball;
  if (s == "uniform_cube") return Generator::uniform_cube;
  if (s == "gaussian_mixture") return Generator::gaussian_mixture;
  if (s == "sphere_uniform") return Generator::sphere_uniform;
  if (s == "simplex_dirichlet") return Generator::simplex_dirichlet;
  throw ParamError("unknown generator '" + std::string(s) + "'");
}

/// A synthetic point distribution. `param` is the ball radius, the cube
/// side, the mixture component count or the Dirichlet concentration; the
/// sphere ignores it.
struct GeneratorSpec {
  Generator kind = Generator::uniform_ball;
  double param = 1.0;
  std::size_t dim = 2;

  Domain domain() const noexcept {
    switch (kind) {
    case Generator::sphere_uniform: return Domain::sphere;
    case Generator::simplex_dirichlet: return Domain::simplex;
    default: return Domain::euclidean;
    }
  }

  void validate() const {
    if (dim == 0) throw ParamError("generator dimension must be positive");
    if (kind == Generator::sphere_uniform) return;
    if (!(param > 0.0) || !std::isfinite(param)) throw ParamError("generator parameter must be positive");
    if (kind == Generator::gaussian_mixture && param != std::floor(param))
      throw ParamError("mixture component count must be an integer");
  }
};

inline constexpr double mixture_spread = 0.1;

/// n points from the generator; deterministic in (g, n, seed).
inline DataSet generate(const GeneratorSpec& g, std::size_t n, std::uint64_t seed) {
  g.validate();
  if (n == 0) throw ParamError("cannot generate an empty dataset");
  const std::size_t d = g.dim;
  Rng rng(seed);
  std::vector<double> coords(n * d);
  std::vector<double> centers;
  if (g.kind == Generator::gaussian_mixture) {
    centers.resize(static_cast<std::size_t>(g.param) * d);
    for (auto& c : centers) c = rng.uniform();
  }
  for (std::size_t i = 0; i < n; ++i) {
    double* x = coords.data() + i * d;
    switch (g.kind) {
    case Generator::uniform_ball: {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = rng.normal();
          norm += x[k] * x[k];
        }
      } while (norm == 0.0);
      const double r = g.param * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(norm);
      for (std::size_t k = 0; k < d; ++k) x[k] *= r;
      break;
    }
    case Generator::uniform_cube:
      for (std::size_t k = 0; k < d; ++k) x[k] = g.param * rng.uniform();
      break;
    case Generator::gaussian_mixture: {
      const auto c = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(g.param)));
      for (std::size_t k = 0; k < d; ++k) x[k] = centers[c * d + k] + mixture_spread * rng.normal();
      break;
    }
    case Generator::sphere_uniform: {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = rng.normal();
          norm += x[k] * x[k];
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (std::size_t k = 0; k < d; ++k) x[k] /= norm;
      break;
    }
    case Generator::simplex_dirichlet: {
      double sum = 0.0;
      do {
        sum = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = rng.gamma(g.param);
          sum += x[k];
        }
      } while (!(sum > 0.0));
      for (std::size_t k = 0; k < d; ++k) x[k] /= sum;
      break;
    }
    }
  }
  return DataSet(std::move(coords), d, g.domain(), std::string(to_string(g.kind)) + "-" + std::to_string(n));
}

enum class BenchMode { discrepancy, coreset };

struct BenchPlan {
  GeneratorSpec generator;
  std::vector<std::size_t> sizes;       ///< Dataset sizes n, strictly increasing.
  std::vector<KernelFamily> families;
  std::vector<double> alphas;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  BenchMode mode = BenchMode::discrepancy;
  bool exact = false;                   ///< Add exact minima for n <= 16.
  std::vector<std::size_t> coreset_sizes;  ///< Coreset mode: m values.
  std::size_t query_budget = 0;         ///< 0 means n.
  std::size_t error_climbs = 2000;      ///< Coreset mode: climbs for measured KDE error.
  bool timing = false;                  ///< Record wall_ms; otherwise 0 for reproducible output.

  void validate() const {
    generator.validate();
    if (sizes.empty()) throw ParamError("bench plan needs at least one size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < 2) throw ParamError("bench sizes must be at least 2");
      if (i > 0 && sizes[i] <= sizes[i - 1]) throw ParamError("bench sizes must be strictly increasing");
    }
    if (families.empty() || alphas.empty()) throw ParamError("bench plan has an empty kernel grid");
    for (double a : alphas)
      if (!(a > 0.0) || !std::isfinite(a)) throw ParamError("bench alphas must be positive");
    for (auto f : families)
      if (kernel_domain(f) != generator.domain())
        throw ParamError(std::string(to_string(f)) + " kernel does not match the " +
                         std::string(to_string(generator.domain())) + " generator");
    if (repetitions < 1) throw ParamError("repetitions must be at least 1");
    if (mode == BenchMode::coreset && coreset_sizes.empty()) throw ParamError("coreset mode needs coreset sizes");
  }
};

inline constexpr const char* bench_csv_header = "kernel,alpha,d,n_or_m,method,value,seed,wall_ms";

namespace detail {

class CsvRows {
public:
  explicit CsvRows(bool timing) : timing_(timing) { out_ << bench_csv_header << '\n'; }

  void add(const KernelSpec& k, std::size_t d, std::size_t n_or_m, std::string_view method, double value,
           std::uint64_t seed, double wall_ms) {
    out_ << to_string(k.family) << ',' << fmt(k.alpha) << ',' << d << ',' << n_or_m << ',' << method << ','
         << fmt(value) << ',' << seed << ',' << (timing_ ? fmt(wall_ms) : std::string("0")) << '\n';
  }

  std::string str() const { return out_.str(); }

private:
  static std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  }

  bool timing_;
  std::ostringstream out_;
};

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

} // namespace detail

/// Runs the plan and returns the CSV table. Every row's seed regenerates
/// both the dataset and the randomness of its method.
inline std::string run_scaling(const BenchPlan& plan) {
  plan.validate();
  detail::CsvRows rows(plan.timing);
  const std::size_t d = plan.generator.dim;
  std::uint64_t cell = 0;
  for (std::size_t n : plan.sizes) {
    for (auto family : plan.families) {
      for (double alpha : plan.alphas) {
        const KernelSpec spec(family, alpha);
        for (std::size_t rep = 0; rep < plan.repetitions; ++rep, ++cell) {
          const std::uint64_t seed = derive_seed(plan.seed, cell);
          const DataSet ds = generate(plan.generator, n, derive_seed(seed, 0));
          const std::size_t budget = plan.query_budget == 0 ? n : plan.query_budget;

          if (plan.mode == BenchMode::discrepancy) {
            const QuerySpace qs = build_query_space(spec, ds);
            {
              detail::Stopwatch sw;
              const Coloring c = gram_schmidt_walk(GramOracle(spec, ds), derive_seed(seed, 1));
              const double v = sup_discrepancy(spec, ds, c, qs, budget, derive_seed(seed, 2)).sup_discrepancy;
              rows.add(spec, d, n, "gsw", v, seed, sw.ms());
            }
            {
              detail::Stopwatch sw;
              const Coloring c = random_coloring(n, derive_seed(seed, 3));
              const double v = sup_discrepancy(spec, ds, c, qs, budget, derive_seed(seed, 2)).sup_discrepancy;
              rows.add(spec, d, n, "random", v, seed, sw.ms());
            }
            if (plan.exact && n <= exact_max_points) {
              detail::Stopwatch sw;
              std::vector<Point> queries;
              for (std::size_t i = 0; i < n; ++i) queries.emplace_back(ds.point(i).begin(), ds.point(i).end());
              const double v = exact_min_discrepancy(spec, ds, queries).value;
              rows.add(spec, d, n, "exact", v, seed, sw.ms());
            }
            continue;
          }

          RunConfig config;
          config.kernel_family = family;
          config.alpha = alpha;
          config.seed = derive_seed(seed, 1);
          config.query_budget = budget;
          std::size_t smallest = n;
          for (std::size_t m : plan.coreset_sizes) {
            if (m < 1 || m > n) throw TargetError("coreset size " + std::to_string(m) + " outside [1, n]");
            smallest = std::min(smallest, m);
          }
          config.target_size = smallest;

          // One build serves every m: the level sequence does not depend on the target.
          std::vector<std::vector<std::size_t>> snapshots{std::vector<std::size_t>()};
          std::vector<double> snapshot_ms{0.0};
          detail::Stopwatch build_clock;
          snapshots[0].resize(n);
          for (std::size_t i = 0; i < n; ++i) snapshots[0][i] = i;
          build_coreset(spec, ds, config, [&](const CoresetResult& partial) {
            snapshots.push_back(partial.indices);
            snapshot_ms.push_back(build_clock.ms());
          });

          for (std::size_t m : plan.coreset_sizes) {
            std::size_t level = 0;
            while (snapshots[level].size() > m) ++level;
            {
              detail::Stopwatch sw;
              const double v =
                  measure_kde_error(spec, ds, snapshots[level], plan.error_climbs, derive_seed(seed, 4)).sup_discrepancy;
              rows.add(spec, d, snapshots[level].size(), "gsw_coreset", v, seed, snapshot_ms[level] + sw.ms());
            }
            {
              detail::Stopwatch sw;
              const auto sample = uniform_sampling_baseline(ds, m, derive_seed(seed, 5));
              const double v =
                  measure_kde_error(spec, ds, sample, plan.error_climbs, derive_seed(seed, 4)).sup_discrepancy;
              rows.add(spec, d, m, "uniform", v, seed, sw.ms());
            }
          }
        }
      }
    }
  }
  return rows.str();
}

} // namespace coreset_forge
