#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coreset.hpp"
#include "dataset.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace coreset_forge {

/// What a discrepancy document measured.
enum class Quantity { coloring, kde_error };

inline std::string_view to_string(Quantity q) noexcept {
  return q == Quantity::coloring ? "coloring_discrepancy" : "kde_error";
}

inline Quantity parse_quantity(std::string_view s) {
  if (s == "coloring_discrepancy") return Quantity::coloring;
  if (s == "kde_error") return Quantity::kde_error;
  throw FormatError("unknown quantity '" + std::string(s) + "'");
}

/// A DiscrepancyReport with the context needed to reproduce it.
struct DiscrepancyDocument {
  std::string dataset_id;
  KernelSpec kernel;
  std::uint64_t seed = 0;
  Quantity quantity = Quantity::coloring;
  std::vector<std::int8_t> signs;     ///< Coloring, for Quantity::coloring.
  std::vector<std::size_t> indices;   ///< Coreset, for Quantity::kde_error.
  DiscrepancyReport report;
  double wall_ms = 0.0;

  friend bool operator==(const DiscrepancyDocument&, const DiscrepancyDocument&) = default;
};

using Report = std::variant<CoresetResult, DiscrepancyDocument>;

namespace detail {

using json = nlohmann::ordered_json;

inline json kernel_json(const KernelSpec& k) {
  return json{{"family", std::string(to_string(k.family))}, {"alpha", k.alpha}};
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("report is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("report field '") + key + "' has the wrong type");
  }
}

inline KernelSpec kernel_from(const json& j) {
  const auto& k = j.at("kernel");
  return KernelSpec(parse_kernel_family(field<std::string>(k, "family")), field<double>(k, "alpha"));
}

} // namespace detail

inline nlohmann::ordered_json to_json(const CoresetResult& r) {
  using detail::json;
  json config{
      {"epsilon", r.config.epsilon ? json(*r.config.epsilon) : json(nullptr)},
      {"target_size", r.config.target_size ? json(*r.config.target_size) : json(nullptr)},
      {"query_budget", r.config.query_budget},
      {"partitioned", r.config.partitioned},
      {"threshold_constant", r.config.threshold_constant},
      {"max_rejection_rounds", r.config.max_rejection_rounds},
  };
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back(json{{"n_before", l.n_before},
                          {"sup_discrepancy", l.sup_discrepancy},
                          {"witness", l.witness},
                          {"rebalance_flips", l.rebalance_flips},
                          {"cells", l.cells},
                          {"cell_rounds", l.cell_rounds},
                          {"exhausted_cells", l.exhausted_cells}});
  }
  return json{{"kind", "coreset"},
              {"dataset_id", r.dataset_id},
              {"kernel", detail::kernel_json(r.config.kernel())},
              {"seed", r.config.seed},
              {"prng", std::string(prng_name)},
              {"config", std::move(config)},
              {"indices", r.indices},
              {"levels", std::move(levels)},
              {"error_estimate", r.error_estimate},
              {"wall_ms", r.wall_ms}};
}

inline nlohmann::ordered_json to_json(const DiscrepancyDocument& d) {
  using detail::json;
  return json{{"kind", "discrepancy"},
              {"dataset_id", d.dataset_id},
              {"kernel", detail::kernel_json(d.kernel)},
              {"seed", d.seed},
              {"prng", std::string(prng_name)},
              {"quantity", std::string(to_string(d.quantity))},
              {"signs", d.signs},
              {"indices", d.indices},
              {"sup_discrepancy", d.report.sup_discrepancy},
              {"witness", d.report.witness},
              {"evaluations", d.report.evaluations},
              {"method", std::string(to_string(d.report.method))},
              {"wall_ms", d.wall_ms}};
}

inline Report report_from_json(const nlohmann::ordered_json& j) {
  using detail::field;
  using detail::json;
  try {
    const auto kind = field<std::string>(j, "kind");
    if (kind == "coreset") {
      CoresetResult r;
      r.dataset_id = field<std::string>(j, "dataset_id");
      const KernelSpec k = detail::kernel_from(j);
      r.config.kernel_family = k.family;
      r.config.alpha = k.alpha;
      r.config.seed = field<std::uint64_t>(j, "seed");
      const auto& c = j.at("config");
      if (!c.at("epsilon").is_null()) r.config.epsilon = field<double>(c, "epsilon");
      if (!c.at("target_size").is_null()) r.config.target_size = field<std::size_t>(c, "target_size");
      r.config.query_budget = field<std::size_t>(c, "query_budget");
      r.config.partitioned = field<bool>(c, "partitioned");
      r.config.threshold_constant = field<double>(c, "threshold_constant");
      r.config.max_rejection_rounds = field<std::size_t>(c, "max_rejection_rounds");
      r.indices = field<std::vector<std::size_t>>(j, "indices");
      for (const auto& l : j.at("levels")) {
        LevelRecord rec;
        rec.n_before = field<std::size_t>(l, "n_before");
        rec.sup_discrepancy = field<double>(l, "sup_discrepancy");
        rec.witness = field<Point>(l, "witness");
        rec.rebalance_flips = field<std::size_t>(l, "rebalance_flips");
        rec.cells = field<std::size_t>(l, "cells");
        rec.cell_rounds = field<std::vector<std::size_t>>(l, "cell_rounds");
        rec.exhausted_cells = field<std::size_t>(l, "exhausted_cells");
        r.levels.push_back(std::move(rec));
      }
      r.error_estimate = field<double>(j, "error_estimate");
      r.wall_ms = field<double>(j, "wall_ms");
      return r;
    }
    if (kind == "discrepancy") {
      DiscrepancyDocument d;
      d.dataset_id = field<std::string>(j, "dataset_id");
      d.kernel = detail::kernel_from(j);
      d.seed = field<std::uint64_t>(j, "seed");
      d.quantity = parse_quantity(field<std::string>(j, "quantity"));
      d.signs = field<std::vector<std::int8_t>>(j, "signs");
      d.indices = field<std::vector<std::size_t>>(j, "indices");
      d.report.sup_discrepancy = field<double>(j, "sup_discrepancy");
      d.report.witness = field<Point>(j, "witness");
      d.report.evaluations = field<std::size_t>(j, "evaluations");
      d.report.method = parse_search_method(field<std::string>(j, "method"));
      d.wall_ms = field<double>(j, "wall_ms");
      return d;
    }
    throw FormatError("unknown report kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const ParamError& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

inline std::string report_to_string(const Report& r) {
  return std::visit([](const auto& v) { return to_json(v).dump(); }, r) + "\n";
}

inline Report parse_report(std::string_view text) {
  auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("report is not valid JSON");
  return report_from_json(j);
}

inline void write_report(const Report& r, const std::filesystem::path& path) {
  write_text_file(path, report_to_string(r));
}

inline Report read_report(const std::filesystem::path& path) {
  return parse_report(read_file_bytes(path));
}

} // namespace coreset_forge
