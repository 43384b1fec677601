#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace coreset_forge;
using namespace testing_support;

namespace {

double random_real(Rng& rng) {
  // Mix of scales, signs and awkward decimal expansions.
  switch (rng.below(4)) {
  case 0: return rng.uniform();
  case 1: return std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
  case 2: return static_cast<double>(rng.below(1000)) / 7.0;
  default: return 0.1 * static_cast<double>(rng.below(10));
  }
}

CoresetResult random_coreset(Rng& rng) {
  CoresetResult r;
  r.dataset_id = "set-" + std::to_string(rng.below(1000));
  r.config.kernel_family = all_families[rng.below(5)];
  r.config.alpha = 0.1 + 10.0 * rng.uniform();
  if (rng.bernoulli(0.5))
    r.config.epsilon = 0.5 * rng.uniform() + 1e-3;
  else
    r.config.target_size = 1 + rng.below(100);
  r.config.seed = rng();
  r.config.query_budget = 1 + rng.below(5000);
  r.config.partitioned = rng.bernoulli(0.5);
  r.config.threshold_constant = random_real(rng) + 0.5;
  r.config.max_rejection_rounds = 1 + rng.below(60);
  for (std::size_t i = 0, n = rng.below(30); i < n; ++i) r.indices.push_back(i * 3 + rng.below(3));
  for (std::size_t s = 0, t = rng.below(5); s < t; ++s) {
    LevelRecord l;
    l.n_before = 1 + rng.below(4096);
    l.sup_discrepancy = std::abs(random_real(rng));
    for (std::size_t k = 0, d = 1 + rng.below(4); k < d; ++k) l.witness.push_back(random_real(rng));
    l.rebalance_flips = rng.below(10);
    l.cells = rng.below(10);
    for (std::size_t c = 0; c < l.cells; ++c) l.cell_rounds.push_back(1 + rng.below(50));
    l.exhausted_cells = rng.below(3);
    r.levels.push_back(l);
  }
  r.error_estimate = std::abs(random_real(rng));
  r.wall_ms = std::abs(random_real(rng));
  return r;
}

DiscrepancyDocument random_document(Rng& rng) {
  DiscrepancyDocument d;
  d.dataset_id = "doc";
  d.kernel = KernelSpec(all_families[rng.below(5)], 0.5 + rng.uniform());
  d.seed = rng();
  d.quantity = rng.bernoulli(0.5) ? Quantity::coloring : Quantity::kde_error;
  for (std::size_t i = 0, n = rng.below(20); i < n; ++i) d.signs.push_back(rng.bernoulli(0.5) ? 1 : -1);
  for (std::size_t i = 0, n = rng.below(20); i < n; ++i) d.indices.push_back(rng.below(1u << 20));
  d.report.sup_discrepancy = std::abs(random_real(rng));
  for (std::size_t k = 0, dim = rng.below(4); k < dim; ++k) d.report.witness.push_back(random_real(rng));
  d.report.evaluations = rng.below(1u << 30);
  d.report.method = static_cast<SearchMethod>(rng.below(3));
  d.wall_ms = random_real(rng);
  return d;
}

} // namespace

TEST(ReportJson, SchemaEcho) {
  CoresetResult r;
  r.dataset_id = "toy";
  r.config.target_size = 2;
  r.indices = {0, 2};
  const std::string text = report_to_string(r);
  EXPECT_NE(text.find("\"indices\":[0,2]"), std::string::npos);
  EXPECT_NE(text.find("\"kind\":\"coreset\""), std::string::npos);
  EXPECT_NE(text.find("\"kernel\":{\"family\":\"gaussian\",\"alpha\":1.0}"), std::string::npos);
  for (const char* key : {"dataset_id", "seed", "levels", "error_estimate", "wall_ms", "prng"})
    EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
}

TEST(ReportJson, ZeroDiscrepancy) {
  DiscrepancyDocument d;
  const std::string text = report_to_string(d);
  EXPECT_NE(text.find("\"sup_discrepancy\":0.0"), std::string::npos);
  EXPECT_NE(text.find("\"kind\":\"discrepancy\""), std::string::npos);
}

TEST(ReportJson, RandomRoundTripsAreExact) {
  Rng rng(1);
  const auto dir = scratch_dir("reports");
  for (int t = 0; t < 300; ++t) {
    const Report a = random_coreset(rng);
    const Report b = random_document(rng);
    EXPECT_EQ(parse_report(report_to_string(a)), a);
    EXPECT_EQ(parse_report(report_to_string(b)), b);
    if (t % 50 == 0) {
      write_report(a, dir / "a.json");
      EXPECT_EQ(read_report(dir / "a.json"), a);
    }
  }
}

TEST(ReportJson, MalformedInputsAreFormatErrors) {
  EXPECT_THROW(parse_report("not json"), FormatError);
  EXPECT_THROW(parse_report("{}"), FormatError);
  EXPECT_THROW(parse_report("{\"kind\":\"other\"}"), FormatError);
  EXPECT_THROW(parse_report("{\"kind\":\"coreset\",\"dataset_id\":3}"), FormatError);
  std::string text = report_to_string(DiscrepancyDocument{});
  const std::string method = "\"method\":\"exact_candidates\"";
  text.replace(text.find(method), method.size(), "\"method\":\"guess\"");
  EXPECT_THROW(parse_report(text), FormatError);
  EXPECT_THROW(read_report("/nonexistent/report.json"), IoError);
}
