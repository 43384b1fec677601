// coreset-forge: command-line front end for the coreset_forge library.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <coreset_forge/coreset_forge.hpp>

namespace cf = coreset_forge;

namespace {

struct KernelArgs {
  std::string family = "gaussian";
  double alpha = 1.0;

  void add_to(CLI::App& app) {
    app.add_option("--kernel", family, "gaussian | laplacian | exponential | hellinger | js")->capture_default_str();
    app.add_option("--alpha", alpha, "inverse bandwidth")->capture_default_str();
  }
  cf::KernelSpec spec() const { return cf::KernelSpec(cf::parse_kernel_family(family), alpha); }
};

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("CORESET_FORGE_SEED");
  if (!env || !*env) return flag;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) throw cf::ParamError("CORESET_FORGE_SEED is not an unsigned integer");
  return v;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    cf::write_text_file(out, text);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::vector<cf::Point> data_points(const cf::DataSet& ds) {
  std::vector<cf::Point> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.emplace_back(ds.point(i).begin(), ds.point(i).end());
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"KDE coresets from kernel discrepancy"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset");
  std::string gen_kind = "uniform_ball", gen_format = "csv", gen_out;
  double gen_param = 1.0;
  std::size_t gen_dim = 2, gen_n = 100;
  std::uint64_t gen_seed = 0;
  gen->add_option("--generator", gen_kind,
                  "uniform_ball | uniform_cube | gaussian_mixture | sphere_uniform | simplex_dirichlet")
      ->capture_default_str();
  gen->add_option("--param", gen_param, "radius, side, component count or concentration")->capture_default_str();
  gen->add_option("--dim", gen_dim)->capture_default_str();
  gen->add_option("-n,--points", gen_n)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--format", gen_format, "csv | binary")->capture_default_str();
  gen->add_option("--out", gen_out, "output path (stdout if omitted)");

  // build
  auto* build = app.add_subcommand("build", "build a coreset and print its report");
  KernelArgs build_kernel;
  build_kernel.add_to(*build);
  std::string build_data, build_out;
  std::optional<double> build_eps;
  std::optional<std::size_t> build_size, build_budget;
  std::uint64_t build_seed = 0;
  bool build_partitioned = false, build_timing = false;
  double build_threshold = 2.0;
  std::size_t build_rounds = 50;
  build->add_option("--data", build_data, "CSV or KDC1 binary dataset")->required();
  auto* eps_opt = build->add_option("--epsilon", build_eps, "target sup-norm error in (0, 1)");
  auto* size_opt = build->add_option("--size", build_size, "target coreset size");
  eps_opt->excludes(size_opt);
  build->add_flag("--partitioned", build_partitioned, "use the cell-partition builder");
  build->add_option("--seed", build_seed)->capture_default_str();
  build->add_option("--query-budget", build_budget, "sup-search budget per level (default n)");
  build->add_option("--threshold-constant", build_threshold)->capture_default_str();
  build->add_option("--max-rejection-rounds", build_rounds)->capture_default_str();
  build->add_flag("--timing", build_timing, "record wall-clock time in the report");
  build->add_option("--out", build_out);

  // eval
  auto* eval = app.add_subcommand("eval", "measure the KDE error of a coreset");
  KernelArgs eval_kernel;
  eval_kernel.add_to(*eval);
  std::string eval_data, eval_coreset, eval_out;
  std::optional<std::size_t> eval_uniform;
  std::size_t eval_climbs = 2000;
  std::uint64_t eval_seed = 0;
  bool eval_timing = false;
  eval->add_option("--data", eval_data)->required();
  auto* coreset_opt = eval->add_option("--coreset", eval_coreset, "coreset report from `build` (sets the kernel)");
  auto* uniform_opt = eval->add_option("--uniform", eval_uniform, "evaluate a uniform sample of this size instead");
  coreset_opt->excludes(uniform_opt);
  eval->add_option("--climbs", eval_climbs, "multistart climbs")->capture_default_str();
  eval->add_option("--seed", eval_seed)->capture_default_str();
  eval->add_flag("--timing", eval_timing);
  eval->add_option("--out", eval_out);

  // disc
  auto* disc = app.add_subcommand("disc", "color a dataset and estimate its kernel discrepancy");
  KernelArgs disc_kernel;
  disc_kernel.add_to(*disc);
  std::string disc_data, disc_algorithm = "gsw", disc_out;
  std::optional<std::size_t> disc_budget;
  std::uint64_t disc_seed = 0;
  bool disc_timing = false;
  disc->add_option("--data", disc_data)->required();
  disc->add_option("--coloring", disc_algorithm, "gsw | random")->capture_default_str();
  disc->add_option("--query-budget", disc_budget, "search budget (default n)");
  disc->add_option("--seed", disc_seed)->capture_default_str();
  disc->add_flag("--timing", disc_timing);
  disc->add_option("--out", disc_out);

  // brute
  auto* brute = app.add_subcommand("brute", "exact minimum discrepancy over data-point queries (n <= 16)");
  KernelArgs brute_kernel;
  brute_kernel.add_to(*brute);
  std::string brute_data, brute_out;
  brute->add_option("--data", brute_data)->required();
  brute->add_option("--out", brute_out);

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark plan and print CSV");
  std::string bench_kind = "uniform_ball", bench_mode = "discrepancy", bench_out;
  double bench_param = 1.0;
  std::size_t bench_dim = 2, bench_reps = 1, bench_budget = 0, bench_climbs = 2000;
  std::vector<std::size_t> bench_sizes, bench_msizes;
  std::vector<std::string> bench_kernels{"gaussian"};
  std::vector<double> bench_alphas{1.0};
  std::uint64_t bench_seed = 0;
  bool bench_exact = false, bench_timing = false;
  bench->add_option("--generator", bench_kind)->capture_default_str();
  bench->add_option("--param", bench_param)->capture_default_str();
  bench->add_option("--dim", bench_dim)->capture_default_str();
  bench->add_option("--sizes", bench_sizes, "dataset sizes, strictly increasing")->required()->delimiter(',');
  bench->add_option("--kernels", bench_kernels)->delimiter(',')->capture_default_str();
  bench->add_option("--alphas", bench_alphas)->delimiter(',')->capture_default_str();
  bench->add_option("--repetitions", bench_reps)->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--mode", bench_mode, "discrepancy | coreset")->capture_default_str();
  bench->add_flag("--exact", bench_exact, "add exact minima for n <= 16");
  bench->add_option("--coreset-sizes", bench_msizes, "coreset mode: sizes m")->delimiter(',');
  bench->add_option("--query-budget", bench_budget, "0 means n")->capture_default_str();
  bench->add_option("--error-climbs", bench_climbs)->capture_default_str();
  bench->add_flag("--timing", bench_timing);
  bench->add_option("--out", bench_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      cf::GeneratorSpec g{cf::parse_generator(gen_kind), gen_param, gen_dim};
      const cf::DataSet ds = cf::generate(g, gen_n, effective_seed(gen_seed));
      if (gen_format != "csv" && gen_format != "binary") throw cf::ParamError("format must be csv or binary");
      const std::string bytes = gen_format == "csv" ? cf::to_csv(ds) : cf::to_binary(ds);
      if (gen_out.empty() || gen_out == "-") {
        std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
      } else {
        cf::write_text_file(gen_out, bytes);
      }
    } else if (*build) {
      const auto start = std::chrono::steady_clock::now();
      const cf::KernelSpec spec = build_kernel.spec();
      const cf::DataSet ds = cf::load_dataset(build_data, spec.domain());
      cf::RunConfig config;
      config.kernel_family = spec.family;
      config.alpha = spec.alpha;
      config.epsilon = build_eps;
      config.target_size = build_size;
      config.seed = effective_seed(build_seed);
      config.query_budget = build_budget.value_or(ds.size());
      config.partitioned = build_partitioned;
      config.threshold_constant = build_threshold;
      config.max_rejection_rounds = build_rounds;
      cf::CoresetResult result = cf::build_coreset(spec, ds, config);
      if (build_timing) result.wall_ms = elapsed_ms(start);
      emit(cf::report_to_string(result), build_out);
    } else if (*eval) {
      const auto start = std::chrono::steady_clock::now();
      cf::KernelSpec spec = eval_kernel.spec();
      std::vector<std::size_t> indices;
      const std::uint64_t seed = effective_seed(eval_seed);
      if (!eval_coreset.empty()) {
        const auto report = cf::read_report(eval_coreset);
        const auto* coreset = std::get_if<cf::CoresetResult>(&report);
        if (!coreset) throw cf::FormatError("--coreset expects a coreset report");
        spec = coreset->config.kernel();
        indices = coreset->indices;
      }
      const cf::DataSet ds = cf::load_dataset(eval_data, spec.domain());
      if (eval_uniform) indices = cf::uniform_sampling_baseline(ds, *eval_uniform, seed);
      if (indices.empty()) throw cf::ParamError("eval needs --coreset or --uniform");
      cf::DiscrepancyDocument doc;
      doc.dataset_id = ds.id();
      doc.kernel = spec;
      doc.seed = seed;
      doc.quantity = cf::Quantity::kde_error;
      doc.indices = indices;
      doc.report = cf::measure_kde_error(spec, ds, indices, eval_climbs, seed);
      if (eval_timing) doc.wall_ms = elapsed_ms(start);
      emit(cf::report_to_string(doc), eval_out);
    } else if (*disc) {
      const auto start = std::chrono::steady_clock::now();
      const cf::KernelSpec spec = disc_kernel.spec();
      const cf::DataSet ds = cf::load_dataset(disc_data, spec.domain());
      const std::uint64_t seed = effective_seed(disc_seed);
      cf::Coloring coloring;
      if (disc_algorithm == "gsw")
        coloring = cf::gram_schmidt_walk(cf::GramOracle(spec, ds), cf::derive_seed(seed, 0));
      else if (disc_algorithm == "random")
        coloring = cf::random_coloring(ds.size(), cf::derive_seed(seed, 0));
      else
        throw cf::ParamError("coloring must be gsw or random");
      cf::DiscrepancyDocument doc;
      doc.dataset_id = ds.id();
      doc.kernel = spec;
      doc.seed = seed;
      doc.signs = coloring.signs;
      if (ds.size() < 2) {
        doc.report = cf::DiscrepancyReport{1.0, data_points(ds)[0], 1, cf::SearchMethod::exact_candidates};
      } else {
        const cf::QuerySpace qs = cf::build_query_space(spec, ds);
        doc.report =
            cf::sup_discrepancy(spec, ds, coloring, qs, disc_budget.value_or(ds.size()), cf::derive_seed(seed, 1));
      }
      if (disc_timing) doc.wall_ms = elapsed_ms(start);
      emit(cf::report_to_string(doc), disc_out);
    } else if (*brute) {
      const cf::KernelSpec spec = brute_kernel.spec();
      const cf::DataSet ds = cf::load_dataset(brute_data, spec.domain());
      const auto queries = data_points(ds);
      const cf::ExactMinimum best = cf::exact_min_discrepancy(spec, ds, queries);
      cf::DiscrepancyDocument doc;
      doc.dataset_id = ds.id();
      doc.kernel = spec;
      doc.signs = best.coloring.signs;
      doc.report.sup_discrepancy = best.value;
      doc.report.evaluations = queries.size();
      doc.report.method = cf::SearchMethod::exact_candidates;
      // Witness: the data point attaining the maximum for the optimal coloring.
      double worst = -1.0;
      for (const auto& q : queries) {
        const double v = cf::point_discrepancy(spec, ds, best.coloring, q);
        if (v > worst) {
          worst = v;
          doc.report.witness = q;
        }
      }
      emit(cf::report_to_string(doc), brute_out);
    } else if (*bench) {
      cf::BenchPlan plan;
      plan.generator = cf::GeneratorSpec{cf::parse_generator(bench_kind), bench_param, bench_dim};
      plan.sizes = bench_sizes;
      for (const auto& k : bench_kernels) plan.families.push_back(cf::parse_kernel_family(k));
      plan.alphas = bench_alphas;
      plan.repetitions = bench_reps;
      plan.seed = effective_seed(bench_seed);
      if (bench_mode == "discrepancy")
        plan.mode = cf::BenchMode::discrepancy;
      else if (bench_mode == "coreset")
        plan.mode = cf::BenchMode::coreset;
      else
        throw cf::ParamError("mode must be discrepancy or coreset");
      plan.exact = bench_exact;
      plan.coreset_sizes = bench_msizes;
      plan.query_budget = bench_budget;
      plan.error_climbs = bench_climbs;
      plan.timing = bench_timing;
      emit(cf::run_scaling(plan), bench_out);
    }
  } catch (const cf::Error& e) {
    std::cerr << "coreset-forge: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "coreset-forge: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
