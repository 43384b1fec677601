#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"

namespace coreset_forge {

enum class KernelFamily { gaussian, laplacian, exponential, hellinger, js };

inline std::string_view to_string(KernelFamily f) noexcept {
  switch (f) {
  case KernelFamily::gaussian: return "gaussian";
  case KernelFamily::laplacian: return "laplacian";
  case KernelFamily::exponential: return "exponential";
  case KernelFamily::hellinger: return "hellinger";
  case KernelFamily::js: return "js";
  }
  return "gaussian";
}

inline KernelFamily parse_kernel_family(std::string_view s) {
  if (s == "gaussian") return KernelFamily::gaussian;
  if (s == "laplacian") return KernelFamily::laplacian;
  if (s == "exponential") return KernelFamily::exponential;
  if (s == "hellinger") return KernelFamily::hellinger;
  if (s == "js") return KernelFamily::js;
  throw ParamError("unknown kernel family '" + std::string(s) + "'");
}

/// Domain on which a family is defined.
constexpr Domain kernel_domain(KernelFamily f) noexcept {
  switch (f) {
  case KernelFamily::exponential: return Domain::sphere;
  case KernelFamily::hellinger:
  case KernelFamily::js: return Domain::simplex;
  default: return Domain::euclidean;
  }
}

/// A kernel family with bandwidth parameter 1/alpha.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double alpha = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelFamily f, double a) : family(f), alpha(a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParamError("alpha must be positive and finite");
  }

  Domain domain() const noexcept { return kernel_domain(family); }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// ---------------------------------------------------------------------------
// Radial profiles: K(x, y) = kappa(scale * |x - y|_2).

enum class ProfileShape { gaussian, laplacian };

struct RadialProfile {
  ProfileShape shape;
  double scale;

  double kappa(double z) const noexcept {
    return shape == ProfileShape::gaussian ? std::exp(-z * z) : std::exp(-z);
  }

  /// Closed-form inverse on (0, 1].
  double kappa_inv(double u) const {
    if (!(u > 0.0 && u <= 1.0)) throw ParamError("kappa_inv is defined on (0, 1]");
    if (u == 1.0) return 0.0;
    const double t = -std::log(u);
    return shape == ProfileShape::gaussian ? std::sqrt(t) : t;
  }

  /// sup |kappa'|, the Lipschitz constant of kappa.
  double kappa_lipschitz() const noexcept {
    return shape == ProfileShape::gaussian ? std::sqrt(2.0 / std::numbers::e) : 1.0;
  }
};

/// Gaussian and Laplacian are radial on R^d. The exponential kernel is the
/// Gaussian profile restricted to the sphere, exp(-(alpha/2)|x-y|^2), so its
/// scale is sqrt(alpha/2). Hellinger and JS have no radial profile.
inline std::optional<RadialProfile> radial_profile(const KernelSpec& spec) noexcept {
  switch (spec.family) {
  case KernelFamily::gaussian: return RadialProfile{ProfileShape::gaussian, spec.alpha};
  case KernelFamily::laplacian: return RadialProfile{ProfileShape::laplacian, spec.alpha};
  case KernelFamily::exponential:
    return RadialProfile{ProfileShape::gaussian, std::sqrt(spec.alpha / 2.0)};
  default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Pointwise pieces

namespace detail {

inline double squared_distance(PointView x, PointView y) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = x[k] - y[k];
    s += t * t;
  }
  return s;
}

inline void check_pair(const KernelSpec& spec, PointView x, PointView y) {
  if (x.size() != y.size() || x.empty()) throw DimensionError("kernel arguments differ in dimension");
  const Domain d = spec.domain();
  if (!in_domain(d, x) || !in_domain(d, y))
    throw DomainError("kernel argument outside the " + std::string(to_string(d)) + " domain of " +
                      std::string(to_string(spec.family)));
}

} // namespace detail

/// h(a) = -a ln a with h(0) = 0.
inline double entropy_term(double a) noexcept { return a == 0.0 ? 0.0 : -a * std::log(a); }

/// Shannon entropy with 0 ln 0 = 0.
inline double shannon_entropy(PointView z) noexcept {
  double h = 0.0;
  for (double v : z) h += entropy_term(v);
  return h;
}

namespace detail {

inline double entropy_gap_unchecked(PointView x, PointView y) noexcept {
  // Summed coordinate-wise so each term is a one-dimensional Jensen gap.
  double gap = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    gap += entropy_term(0.5 * (x[k] + y[k])) - 0.5 * (entropy_term(x[k]) + entropy_term(y[k]));
  return gap > 0.0 ? gap : 0.0;
}

} // namespace detail

/// Jensen gap H((x+y)/2) - (H(x)+H(y))/2 of the Shannon entropy on the simplex.
inline double entropy_midpoint_gap(PointView x, PointView y) {
  if (x.size() != y.size()) throw DimensionError("entropy gap arguments differ in dimension");
  if (!in_domain(Domain::simplex, x) || !in_domain(Domain::simplex, y))
    throw DomainError("entropy gap requires simplex points");
  return detail::entropy_gap_unchecked(x, y);
}

/// Coordinate-wise square root, mapping the simplex onto the positive
/// orthant of the unit sphere.
inline Point hellinger_to_exponential(PointView x) {
  if (!in_domain(Domain::simplex, x)) throw DomainError("hellinger map requires a simplex point");
  Point out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::sqrt(x[k] < 0.0 ? 0.0 : x[k]);
  return out;
}

namespace detail {

/// exp(-(alpha/2)|u - v|^2) for unit vectors u, v; equals exp(-alpha(1 - <u,v>)).
inline double exponential_on_sphere(double alpha, PointView u, PointView v) noexcept {
  return std::exp(-0.5 * alpha * squared_distance(u, v));
}

/// K without domain checks; arguments are assumed valid.
inline double evaluate_unchecked(const KernelSpec& spec, PointView x, PointView y) noexcept {
  switch (spec.family) {
  case KernelFamily::gaussian: {
    const double z = spec.alpha * std::sqrt(squared_distance(x, y));
    return std::exp(-z * z);
  }
  case KernelFamily::laplacian: return std::exp(-spec.alpha * std::sqrt(squared_distance(x, y)));
  case KernelFamily::exponential: return exponential_on_sphere(spec.alpha, x, y);
  case KernelFamily::hellinger: {
    // K_H^(alpha)(x, y) = K_e^(2 alpha)(sqrt x, sqrt y).
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = std::sqrt(std::max(x[k], 0.0)) - std::sqrt(std::max(y[k], 0.0));
      s += t * t;
    }
    return std::exp(-0.5 * (2.0 * spec.alpha) * s);
  }
  case KernelFamily::js: return std::exp(-spec.alpha * entropy_gap_unchecked(x, y));
  }
  return 0.0;
}

} // namespace detail

inline double evaluate(const KernelSpec& spec, PointView x, PointView y) {
  detail::check_pair(spec, x, y);
  return detail::evaluate_unchecked(spec, x, y);
}

/// D_K(x, y) = |phi(x) - phi(y)| = sqrt(2 - 2 K(x, y)).
inline double kernel_distance(const KernelSpec& spec, PointView x, PointView y) {
  const double k = evaluate(spec, x, y);
  const double sq = 2.0 - 2.0 * k;
  return sq > 0.0 ? std::sqrt(sq) : 0.0;
}

/// Distance used to measure query-space balls: l1 for JS, l2 otherwise.
inline double query_metric(KernelFamily f, PointView x, PointView y) noexcept {
  if (f == KernelFamily::js) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += std::abs(x[k] - y[k]);
    return s;
  }
  return std::sqrt(detail::squared_distance(x, y));
}

/// r_K(n): distance beyond which K <= 1/n. Compact domains return their
/// diameter in the query metric (sphere 2, simplex sqrt 2 in l2, 2 in l1).
inline double impact_radius(const KernelSpec& spec, std::size_t n) {
  if (n < 2) throw ParamError("impact radius needs n >= 2");
  switch (spec.family) {
  case KernelFamily::gaussian:
  case KernelFamily::laplacian: {
    const auto profile = *radial_profile(spec);
    return profile.kappa_inv(1.0 / static_cast<double>(n)) / profile.scale;
  }
  case KernelFamily::exponential: return 2.0;
  case KernelFamily::hellinger: return std::numbers::sqrt2;
  case KernelFamily::js: return 2.0;
  }
  throw UnsupportedError("no impact radius for this kernel family");
}

/// True when the query space is the whole (compact) domain.
constexpr bool has_compact_domain(KernelFamily f) noexcept {
  return f == KernelFamily::exponential || f == KernelFamily::hellinger || f == KernelFamily::js;
}

} // namespace coreset_forge
