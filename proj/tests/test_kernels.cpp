#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace coreset_forge;
using namespace testing_support;

namespace {

// Independent textbook formulas used as oracles.
double oracle_entropy(const Point& z) {
  double h = 0.0;
  for (double v : z)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double oracle_kernel(const KernelSpec& k, const Point& x, const Point& y) {
  double sq = 0.0, dot = 0.0, hel = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sq += (x[i] - y[i]) * (x[i] - y[i]);
    dot += x[i] * y[i];
    hel += (std::sqrt(x[i]) - std::sqrt(y[i])) * (std::sqrt(x[i]) - std::sqrt(y[i]));
  }
  switch (k.family) {
  case KernelFamily::gaussian: return std::exp(-k.alpha * k.alpha * sq);
  case KernelFamily::laplacian: return std::exp(-k.alpha * std::sqrt(sq));
  case KernelFamily::exponential: return std::exp(-k.alpha * (1.0 - dot));
  case KernelFamily::hellinger: return std::exp(-k.alpha * hel);
  case KernelFamily::js: {
    Point mid(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mid[i] = 0.5 * (x[i] + y[i]);
    return std::exp(-k.alpha * (oracle_entropy(mid) - 0.5 * (oracle_entropy(x) + oracle_entropy(y))));
  }
  }
  return 0.0;
}

} // namespace

TEST(Evaluate, Examples) {
  const Point e0{1.0, 0.0}, e1{0.0, 1.0};
  EXPECT_DOUBLE_EQ(evaluate(KernelSpec(KernelFamily::js, 1.0), e0, e1), 0.5);
  EXPECT_NEAR(evaluate(KernelSpec(KernelFamily::hellinger, 1.0), e0, e1), std::exp(-2.0), 1e-16);
  const Point x{0.3, -2.0};
  EXPECT_EQ(evaluate(KernelSpec(KernelFamily::gaussian, 7.0), x, x), 1.0);
}

TEST(Evaluate, MatchesIndependentFormulas) {
  Rng rng(5);
  for (auto family : all_families) {
    for (int t = 0; t < 500; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t d = 1 + rng.below(6);
      const Point x = random_point(rng, d, k.domain());
      const Point y = random_point(rng, d, k.domain());
      const double want = oracle_kernel(k, x, y);
      EXPECT_NEAR(evaluate(k, x, y), want, 1e-13 * std::max(1.0, want)) << to_string(family);
    }
  }
}

TEST(Evaluate, UnitDiagonalSymmetricAndInUnitInterval) {
  Rng rng(6);
  for (auto family : all_families) {
    for (int t = 0; t < 300; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t d = 1 + rng.below(8);
      const Point x = random_point(rng, d, k.domain(), 3.0);
      const Point y = random_point(rng, d, k.domain(), 3.0);
      EXPECT_EQ(evaluate(k, x, x), 1.0) << to_string(family);
      EXPECT_EQ(evaluate(k, x, y), evaluate(k, y, x)) << to_string(family);
      const double v = evaluate(k, x, y);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Evaluate, DomainAndDimensionErrors) {
  const Point a{0.6, 0.6}, b{0.5, 0.5};
  EXPECT_THROW(evaluate(KernelSpec(KernelFamily::js, 1.0), a, b), DomainError);
  EXPECT_THROW(evaluate(KernelSpec(KernelFamily::exponential, 1.0), b, b), DomainError);
  const Point c{1.0};
  EXPECT_THROW(evaluate(KernelSpec(KernelFamily::gaussian, 1.0), b, c), DimensionError);
  const Point nan{std::nan(""), 0.0};
  EXPECT_THROW(evaluate(KernelSpec(KernelFamily::gaussian, 1.0), nan, b), DomainError);
  EXPECT_THROW(KernelSpec(KernelFamily::gaussian, 0.0), ParamError);
  EXPECT_THROW(KernelSpec(KernelFamily::gaussian, -1.0), ParamError);
}

TEST(RadialProfile, ConsistentWithEvaluate) {
  Rng rng(7);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian}) {
    for (int t = 0; t < 500; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const Point x = random_point(rng, 3, Domain::euclidean, 2.0);
      const Point y = random_point(rng, 3, Domain::euclidean, 2.0);
      const auto p = *radial_profile(k);
      const double want = p.kappa(p.scale * std::sqrt(detail::squared_distance(x, y)));
      EXPECT_NEAR(evaluate(k, x, y), want, 1e-14 * want);
    }
  }
  EXPECT_FALSE(radial_profile(KernelSpec(KernelFamily::js, 1.0)).has_value());
  EXPECT_FALSE(radial_profile(KernelSpec(KernelFamily::hellinger, 1.0)).has_value());
}

TEST(RadialProfile, StrictlyDecreasingFromOne) {
  for (auto shape : {ProfileShape::gaussian, ProfileShape::laplacian}) {
    const RadialProfile p{shape, 1.0};
    EXPECT_EQ(p.kappa(0.0), 1.0);
    double prev = 1.0;
    for (double z = 0.05; z < 5.0; z += 0.05) {
      EXPECT_LT(p.kappa(z), prev);
      prev = p.kappa(z);
    }
    EXPECT_EQ(p.kappa_inv(1.0), 0.0);
    EXPECT_THROW(p.kappa_inv(0.0), ParamError);
    EXPECT_THROW(p.kappa_inv(1.5), ParamError);
  }
}

// kappa_inv(kappa(z)) = z to 1e-12 relative wherever kappa(z) is a normal
// double and z is not so small that ln(kappa(z)) loses its digits.
TEST(RadialProfile, InverseRoundTrip) {
  const RadialProfile g{ProfileShape::gaussian, 1.0};
  const RadialProfile l{ProfileShape::laplacian, 1.0};
  EXPECT_EQ(g.kappa_inv(g.kappa(0.0)), 0.0);
  for (double z = 0.01; z <= 26.0; z += 0.01) EXPECT_NEAR(g.kappa_inv(g.kappa(z)), z, 1e-12 * z) << z;
  for (double z = 0.01; z <= 50.0; z += 0.01) EXPECT_NEAR(l.kappa_inv(l.kappa(z)), z, 1e-12 * z) << z;
}

TEST(KernelDistance, Examples) {
  const KernelSpec g(KernelFamily::gaussian, 1.0);
  const Point o{0.0}, x{std::sqrt(std::log(2.0))};
  EXPECT_NEAR(evaluate(g, o, x), 0.5, 1e-15);
  EXPECT_NEAR(kernel_distance(g, o, x), 1.0, 1e-15);
  EXPECT_EQ(kernel_distance(g, x, x), 0.0);
  const Point e0{1.0, 0.0}, e1{0.0, 1.0};
  EXPECT_NEAR(kernel_distance(KernelSpec(KernelFamily::js, 1.0), e0, e1), 1.0, 1e-15);
}

TEST(KernelDistance, IsAPseudometric) {
  Rng rng(8);
  for (auto family : all_families) {
    std::size_t violations = 0;
    for (int t = 0; t < 10000; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t d = 1 + rng.below(4);
      const Point x = random_point(rng, d, k.domain());
      const Point y = random_point(rng, d, k.domain());
      const Point z = random_point(rng, d, k.domain());
      const double xy = kernel_distance(k, x, y), yz = kernel_distance(k, y, z), xz = kernel_distance(k, x, z);
      if (xz > xy + yz + 1e-12) ++violations;
      EXPECT_EQ(xy, kernel_distance(k, y, x));
      EXPECT_NEAR(xy, std::sqrt(std::max(0.0, 2.0 - 2.0 * evaluate(k, x, y))), 1e-15);
    }
    EXPECT_EQ(violations, 0u) << to_string(family);
  }
}

TEST(ImpactRadius, Examples) {
  EXPECT_NEAR(impact_radius(KernelSpec(KernelFamily::gaussian, 1.0), 55), std::sqrt(std::log(55.0)), 1e-15);
  EXPECT_NEAR(impact_radius(KernelSpec(KernelFamily::laplacian, 2.0), 100), 2.3026, 1e-4);
  EXPECT_NEAR(impact_radius(KernelSpec(KernelFamily::gaussian, 2.0), 100), 1.0730, 1e-4);
  EXPECT_EQ(impact_radius(KernelSpec(KernelFamily::exponential, 3.0), 10), 2.0);
  EXPECT_EQ(impact_radius(KernelSpec(KernelFamily::hellinger, 3.0), 10), std::numbers::sqrt2);
  EXPECT_EQ(impact_radius(KernelSpec(KernelFamily::js, 3.0), 10), 2.0);
  EXPECT_THROW(impact_radius(KernelSpec(KernelFamily::gaussian, 1.0), 1), ParamError);
}

TEST(ImpactRadius, BoundaryValueIsOneOverN) {
  Rng rng(9);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian}) {
    for (int t = 0; t < 200; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t n = 2 + rng.below(100000);
      const double r = impact_radius(k, n);
      Point x = random_point(rng, 3, Domain::euclidean), dir = random_point(rng, 3, Domain::sphere);
      Point y = x, far = x;
      for (std::size_t i = 0; i < 3; ++i) {
        y[i] += r * dir[i];
        far[i] += 1.01 * r * dir[i];
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      EXPECT_NEAR(evaluate(k, x, y), inv_n, 1e-10 * inv_n);
      EXPECT_LT(evaluate(k, x, far), inv_n);
    }
  }
}

TEST(Exponential, IsGaussianOnTheSphere) {
  Rng rng(10);
  for (int t = 0; t < 10000; ++t) {
    const double alpha = rng.uniform(0.1, 10.0);
    const std::size_t d = 2 + rng.below(6);
    const Point x = random_point(rng, d, Domain::sphere);
    const Point y = random_point(rng, d, Domain::sphere);
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += x[i] * y[i];
    EXPECT_NEAR(evaluate(KernelSpec(KernelFamily::exponential, alpha), x, y), std::exp(-alpha * (1.0 - dot)), 1e-14);
  }
}

TEST(Hellinger, SquareRootMap) {
  const Point e0{1.0, 0.0, 0.0};
  EXPECT_EQ(hellinger_to_exponential(e0), e0);
  const Point q{0.25, 0.75};
  const Point f = hellinger_to_exponential(q);
  EXPECT_EQ(f[0], 0.5);
  EXPECT_NEAR(f[1], 0.8660254037844386, 1e-16);
  EXPECT_THROW(hellinger_to_exponential(Point{0.5, 0.6}), DomainError);
}

TEST(Hellinger, ReductionIdentity) {
  Rng rng(11);
  for (int t = 0; t < 10000; ++t) {
    const double alpha = rng.uniform(0.1, 10.0);
    const std::size_t d = 2 + rng.below(10);
    const Point x = random_point(rng, d, Domain::simplex);
    const Point y = random_point(rng, d, Domain::simplex);
    const Point fx = hellinger_to_exponential(x), fy = hellinger_to_exponential(y);
    const double want = std::exp(-alpha * detail::squared_distance(fx, fy));
    const KernelSpec h(KernelFamily::hellinger, alpha);
    EXPECT_NEAR(evaluate(h, x, y), want, 1e-12 * want);
    // Same value as the exponential kernel at doubled alpha on the mapped points.
    EXPECT_NEAR(evaluate(KernelSpec(KernelFamily::exponential, 2.0 * alpha), fx, fy), want, 1e-12 * want);
  }
}

TEST(Entropy, GapExamplesAndBound) {
  const Point e0{1.0, 0.0}, e1{0.0, 1.0};
  EXPECT_NEAR(entropy_midpoint_gap(e0, e1), std::log(2.0), 1e-15);
  EXPECT_EQ(entropy_midpoint_gap(e0, e0), 0.0);
  EXPECT_EQ(entropy_term(0.0), 0.0);
  Rng rng(12);
  for (std::size_t d : {2u, 5u, 20u}) {
    for (int t = 0; t < 3000; ++t) {
      const Point x = random_point(rng, d, Domain::simplex);
      const Point y = random_point(rng, d, Domain::simplex);
      double l1 = 0.0;
      for (std::size_t i = 0; i < d; ++i) l1 += std::abs(x[i] - y[i]);
      const double gap = entropy_midpoint_gap(x, y);
      EXPECT_GE(gap, 0.0);
      EXPECT_LE(gap, 0.75 * l1);
    }
  }
}

TEST(Gram, PositiveSemidefiniteSpotCheck) {
  Rng rng(13);
  for (auto family : all_families) {
    for (int t = 0; t < 50; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const DataSet ds = random_dataset(rng, 8, 1 + rng.below(4) + (k.domain() == Domain::euclidean ? 0 : 1),
                                        k.domain());
      EXPECT_GE(min_eigenvalue(GramOracle(k, ds).matrix()), -1e-8) << to_string(family);
    }
  }
}

TEST(Families, ParseAndDomain) {
  for (auto family : all_families) EXPECT_EQ(parse_kernel_family(to_string(family)), family);
  EXPECT_THROW(parse_kernel_family("sinc"), ParamError);
  EXPECT_EQ(kernel_domain(KernelFamily::hellinger), Domain::simplex);
  EXPECT_EQ(kernel_domain(KernelFamily::exponential), Domain::sphere);
  EXPECT_EQ(kernel_domain(KernelFamily::laplacian), Domain::euclidean);
}
