#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace coreset_forge;
using namespace testing_support;

namespace {

const KernelSpec gauss1(KernelFamily::gaussian, 1.0);

double brute_signed_sum(const KernelSpec& k, const DataSet& ds, const Coloring& c, const Point& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) s += c.signs[i] * evaluate(k, ds.point(i), y);
  return std::abs(s);
}

} // namespace

TEST(PointDiscrepancy, Examples) {
  const DataSet two({0.0, 2.0}, 1, Domain::euclidean);
  EXPECT_NEAR(point_discrepancy(gauss1, two, Coloring{{1, 1}}, Point{1.0}), 2.0 * std::exp(-1.0), 1e-15);
  const DataSet dup({0.4, 0.4}, 1, Domain::euclidean);
  EXPECT_EQ(point_discrepancy(gauss1, dup, Coloring{{1, -1}}, Point{3.0}), 0.0);
  EXPECT_THROW(point_discrepancy(gauss1, dup, Coloring{{1}}, Point{3.0}), DimensionError);
  EXPECT_THROW(point_discrepancy(gauss1, dup, Coloring{{1, 1}}, Point{1.0, 2.0}), DimensionError);
  const DataSet simplex({0.5, 0.5}, 2, Domain::simplex);
  EXPECT_THROW(point_discrepancy(KernelSpec(KernelFamily::js, 1.0), simplex, Coloring{{1}}, Point{0.9, 0.9}),
               DomainError);
}

TEST(PointDiscrepancy, SignSymmetryAndFastPathAgree) {
  Rng rng(1);
  for (auto family : all_families) {
    for (int t = 0; t < 40; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t d = 2 + rng.below(3);
      const DataSet ds = random_dataset(rng, 1 + rng.below(30), d, k.domain());
      const Coloring c = random_coloring(ds.size(), rng());
      const Point y = random_point(rng, d, k.domain());
      const double v = point_discrepancy(k, ds, c, y);
      EXPECT_EQ(v, point_discrepancy(k, ds, c.negated(), y));
      EXPECT_NEAR(v, brute_signed_sum(k, ds, c, y), 1e-12);
      const auto w = coloring_weights(c);
      SignedSumEvaluator fast(k, ds, w);
      EXPECT_NEAR(std::abs(fast(y)), v, 1e-12) << to_string(family);
    }
  }
}

TEST(PointDiscrepancy, LeakageBeyondImpactRadius) {
  Rng rng(2);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian}) {
    for (int t = 0; t < 30; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const DataSet ds = random_dataset(rng, 2 + rng.below(60), 2, Domain::euclidean);
      const double r = impact_radius(k, ds.size());
      Coloring all_plus{std::vector<std::int8_t>(ds.size(), 1)};
      // Push a query out along a random direction until it is beyond r of every point.
      Point dir = random_point(rng, 2, Domain::sphere);
      Point y{0.0, 0.0};
      for (double s = 0.0;; s += 0.01 * r + 1e-3) {
        y = {s * dir[0], s * dir[1]};
        bool outside = true;
        for (std::size_t i = 0; i < ds.size() && outside; ++i)
          outside = query_metric(family, ds.point(i), y) > r;
        if (outside) break;
      }
      EXPECT_LE(point_discrepancy(k, ds, all_plus, y), 1.0 + 1e-9);
    }
  }
}

TEST(QuerySpace, Components) {
  const double r = impact_radius(gauss1, 2);
  const DataSet far({0.0, 10.0 * r}, 1, Domain::euclidean);
  EXPECT_EQ(build_query_space(gauss1, far).component_count(), 2u);
  const DataSet near({0.0, r}, 1, Domain::euclidean);
  EXPECT_EQ(build_query_space(gauss1, near).component_count(), 1u);
  EXPECT_THROW(build_query_space(gauss1, DataSet({0.0}, 1, Domain::euclidean)), ParamError);
}

TEST(QuerySpace, UnitBallExample) {
  Rng rng(3);
  std::vector<double> coords;
  for (int i = 0; i < 55; ++i) {
    const Point p = random_point(rng, 2, Domain::sphere);
    const double s = std::sqrt(rng.uniform());
    coords.push_back(s * p[0]);
    coords.push_back(s * p[1]);
  }
  const DataSet ds(coords, 2, Domain::euclidean);
  const QuerySpace qs = build_query_space(gauss1, ds);
  EXPECT_EQ(qs.component_count(), 1u);
  EXPECT_NEAR(qs.radius, std::sqrt(std::log(55.0)), 1e-12);
  std::size_t covered = 0;
  for (const auto& comp : qs.components) covered += comp.size();
  EXPECT_EQ(covered, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_LT(qs.component_of[i], qs.component_count());
}

TEST(QuerySpace, CompactDomainsAreOneComponent) {
  Rng rng(4);
  const DataSet ds = random_dataset(rng, 30, 3, Domain::simplex);
  const QuerySpace qs = build_query_space(KernelSpec(KernelFamily::js, 40.0), ds);
  EXPECT_EQ(qs.component_count(), 1u);
  EXPECT_EQ(qs.radius, 2.0);
}

TEST(SupDiscrepancy, Examples) {
  const DataSet two({0.0, 2.0}, 1, Domain::euclidean);
  const QuerySpace qs = build_query_space(gauss1, two);
  const auto rep = sup_discrepancy(gauss1, two, Coloring{{1, 1}}, qs, 2, 0);
  EXPECT_GE(rep.sup_discrepancy, 2.0 * std::exp(-1.0));
  EXPECT_LE(rep.sup_discrepancy, 2.0);
  EXPECT_EQ(rep.method, SearchMethod::grid);
  const DataSet dup({0.4, 0.4}, 1, Domain::euclidean);
  EXPECT_EQ(sup_discrepancy(gauss1, dup, Coloring{{1, -1}}, build_query_space(gauss1, dup), 2, 0).sup_discrepancy,
            0.0);
  EXPECT_THROW(sup_discrepancy(gauss1, two, Coloring{{1, 1}}, qs, 1, 0), BudgetError);
}

TEST(SupDiscrepancy, WitnessConsistencyAndDomain) {
  Rng rng(5);
  for (auto family : all_families) {
    for (int t = 0; t < 6; ++t) {
      const KernelSpec k = random_kernel(rng, family);
      const std::size_t d = (t % 2 == 0) ? 2 : 5;
      const DataSet ds = random_dataset(rng, 10 + rng.below(30), d, k.domain());
      const Coloring c = random_coloring(ds.size(), rng());
      const auto rep = sup_discrepancy(k, ds, c, build_query_space(k, ds), ds.size(), rng());
      ASSERT_EQ(rep.witness.size(), d);
      EXPECT_TRUE(in_domain(k.domain(), rep.witness, 1e-9)) << to_string(family);
      EXPECT_NEAR(rep.sup_discrepancy, point_discrepancy(k, ds, c, rep.witness), 1e-12);
      EXPECT_EQ(rep.method, d <= 3 ? SearchMethod::grid : SearchMethod::multistart);
      EXPECT_GE(rep.evaluations, ds.size());
      // Data points are always candidates.
      EXPECT_GE(rep.sup_discrepancy + 1e-12, max_candidate_discrepancy(k, ds, c, points_of(ds)));
    }
  }
}

TEST(SupDiscrepancy, MonotoneInBudget) {
  Rng rng(6);
  const KernelSpec k(KernelFamily::gaussian, 2.0);
  const DataSet ds = random_dataset(rng, 20, 5, Domain::euclidean);
  const Coloring c = random_coloring(20, 3);
  const QuerySpace qs = build_query_space(k, ds);
  double prev = 0.0;
  for (std::size_t b : {20u, 40u, 80u, 160u}) {
    const double v = sup_discrepancy(k, ds, c, qs, b, 11).sup_discrepancy;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(CertifiedBound, BracketsTheSupremum) {
  Rng rng(7);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian}) {
    for (std::size_t d : {1u, 2u}) {
      const KernelSpec k(family, 2.0);
      const DataSet ds = random_dataset(rng, 16, d, Domain::euclidean);
      const Coloring c = random_coloring(16, rng());
      const QuerySpace qs = build_query_space(k, ds);
      const auto w = coloring_weights(c);
      const CertifiedBound bound = certified_sup_bound(k, ds, w, qs);
      const double lower = sup_discrepancy(k, ds, c, qs, 16, 1).sup_discrepancy;
      EXPECT_GE(bound.upper_bound, lower);
      for (int s = 0; s < 20000; ++s) {
        Point y(d);
        const auto anchor = ds.point(rng.below(16));
        for (std::size_t a = 0; a < d; ++a) y[a] = anchor[a] + rng.uniform(-qs.radius, qs.radius);
        ASSERT_LE(point_discrepancy(k, ds, c, y), bound.upper_bound);
      }
    }
  }
  const DataSet high = random_dataset(rng, 5, 4, Domain::euclidean);
  EXPECT_THROW(certified_sup_bound(gauss1, high, coloring_weights(random_coloring(5, 1)),
                                   build_query_space(gauss1, high)),
               UnsupportedError);
}

TEST(ExactOracle, Examples) {
  const DataSet two({0.3, 0.3}, 1, Domain::euclidean);
  const auto q2 = points_of(two);
  const ExactMinimum a = exact_min_discrepancy(gauss1, two, q2);
  EXPECT_EQ(a.coloring.signs, (std::vector<std::int8_t>{1, -1}));
  EXPECT_EQ(a.value, 0.0);
  EXPECT_EQ(a.coloring.algorithm, ColoringAlgorithm::exhaustive);
  const DataSet three({0.3, 0.3, 0.3}, 1, Domain::euclidean);
  EXPECT_EQ(exact_min_discrepancy(gauss1, three, points_of(three)).value, 1.0);
  Rng rng(8);
  const DataSet big = random_dataset(rng, 17, 1, Domain::euclidean);
  EXPECT_THROW(exact_min_discrepancy(gauss1, big, points_of(big)), SizeError);
  EXPECT_THROW(exact_min_discrepancy(gauss1, two, std::vector<Point>{}), ParamError);
}

TEST(ExactOracle, MatchesIndependentEnumerationAndBeatsHeuristics) {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const KernelSpec k(KernelFamily::gaussian, 2.0);
    const std::size_t n = 2 + rng.below(9);
    const DataSet ds = random_dataset(rng, n, 2, Domain::euclidean);
    const auto queries = points_of(ds);
    const ExactMinimum got = exact_min_discrepancy(k, ds, queries);

    // Independent enumeration over every sign vector (both halves).
    double best = 1e300;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
      Coloring c{std::vector<std::int8_t>(n)};
      for (std::size_t i = 0; i < n; ++i) c.signs[i] = (m >> i) & 1u ? 1 : -1;
      best = std::min(best, max_candidate_discrepancy(k, ds, c, queries));
    }
    EXPECT_NEAR(got.value, best, 1e-12);
    EXPECT_EQ(got.coloring.signs[0], 1);
    EXPECT_NEAR(max_candidate_discrepancy(k, ds, got.coloring, queries), got.value, 1e-12);
    for (std::uint64_t s = 0; s < 5; ++s) {
      EXPECT_LE(got.value, max_candidate_discrepancy(k, ds, gram_schmidt_walk(GramOracle(k, ds), s), queries) + 1e-12);
      EXPECT_LE(got.value, max_candidate_discrepancy(k, ds, random_coloring(n, s), queries) + 1e-12);
    }
  }
}

TEST(ExactOracle, LexicographicTieBreak) {
  // Four identical points: the balanced colorings with a leading +1 all tie
  // at 0, and (+, -, -, +) is the smallest of them with -1 ordered first.
  const DataSet four({0.0, 0.0, 0.0, 0.0}, 1, Domain::euclidean);
  const ExactMinimum m = exact_min_discrepancy(gauss1, four, points_of(four));
  EXPECT_EQ(m.coloring.signs, (std::vector<std::int8_t>{1, -1, -1, 1}));
  EXPECT_EQ(m.value, 0.0);
}
