// Builds a 64-point coreset of 1024 uniform points in the unit square and
// compares its KDE error with a uniform sample of the same size.

#include <iostream>

#include <coreset_forge/coreset_forge.hpp>

using namespace coreset_forge;

int main() {
  const DataSet data = generate(GeneratorSpec{Generator::uniform_cube, 1.0, 2}, 1024, 2024);
  const KernelSpec kernel(KernelFamily::gaussian, 4.0);

  RunConfig config;
  config.kernel_family = kernel.family;
  config.alpha = kernel.alpha;
  config.target_size = 64;
  config.seed = 7;
  config.query_budget = data.size();

  const CoresetResult coreset = build_coreset(kernel, data, config);
  for (const auto& level : coreset.levels)
    std::cout << "level n=" << level.n_before << "  disc=" << level.sup_discrepancy
              << "  flips=" << level.rebalance_flips << '\n';

  const auto sample = uniform_sampling_baseline(data, coreset.indices.size(), 7);
  const double coreset_error = measure_kde_error(kernel, data, coreset.indices, 500, 1).sup_discrepancy;
  const double sample_error = measure_kde_error(kernel, data, sample, 500, 1).sup_discrepancy;

  std::cout << "coreset size    " << coreset.indices.size() << '\n'
            << "error estimate  " << coreset.error_estimate << '\n'
            << "coreset error   " << coreset_error << '\n'
            << "uniform error   " << sample_error << '\n';
}
