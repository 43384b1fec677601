#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "errors.hpp"
#include "kernels.hpp"

namespace coreset_forge {

/// Everything a coreset run needs besides the data. Exactly one of
/// `epsilon` and `target_size` is set.
struct RunConfig {
  KernelFamily kernel_family = KernelFamily::gaussian;
  double alpha = 1.0;
  std::optional<double> epsilon;
  std::optional<std::size_t> target_size;
  std::uint64_t seed = 0;
  std::size_t query_budget = 1024;
  bool partitioned = false;
  double threshold_constant = 2.0;
  std::size_t max_rejection_rounds = 50;

  KernelSpec kernel() const { return KernelSpec(kernel_family, alpha); }

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParamError("alpha must be positive");
    if (epsilon.has_value() == target_size.has_value())
      throw ParamError("set exactly one of epsilon and target size");
    if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) throw ParamError("epsilon must lie in (0, 1)");
    if (target_size && *target_size == 0) throw ParamError("target size must be positive");
    if (query_budget == 0) throw ParamError("query budget must be positive");
    if (!(threshold_constant > 0.0)) throw ParamError("threshold constant must be positive");
    if (max_rejection_rounds == 0) throw ParamError("max rejection rounds must be positive");
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

} // namespace coreset_forge
