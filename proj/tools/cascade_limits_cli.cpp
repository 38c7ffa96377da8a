// cascade-limits: graph generation, cascade sweeps and predictability estimates.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cascade_limits/error.hpp"
#include "cascade_limits/manifest.hpp"
#include "cascade_limits/pipeline.hpp"

namespace cl = cascade_limits;

namespace {

constexpr int kUsageError = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Flags {
  std::string config;
  std::string out;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::string records;
};

cl::ExperimentManifest manifest_from(const Flags& flags, bool seed_is_graph_seed) {
  cl::ExperimentManifest m = cl::load_manifest(flags.config);
  if (!flags.out.empty()) m.output_dir = flags.out;
  if (flags.workers) m.workers = *flags.workers;
  if (flags.seed) {
    if (seed_is_graph_seed) {
      m.graph.rng_seed = *flags.seed;
    } else {
      m.sweep.experiment_seed = *flags.seed;
    }
  }
  return m;
}

void print_graph(const cl::GraphStep& step, const cl::ExperimentManifest& m) {
  std::cout << "graph: " << step.graph_path.string() << '\n'
            << cl::format_summary(step.summary)
            << "self_loops_erased=" << step.generated.build.self_loops_erased << '\n'
            << "multi_edges_erased=" << step.generated.build.multi_edges_erased << '\n'
            << "k_max=" << m.graph.resolved_k_max() << '\n';
}

void print_sweep(const cl::SweepSummary& s, const cl::ExperimentManifest& m, double seconds) {
  std::cout << "records: " << m.records_path().string() << '\n'
            << "record_count=" << s.records << '\n'
            << "batches=" << s.batches << '\n'
            << "mean_degree=" << cl::format_real(s.mean_degree) << '\n'
            << "p_max=" << cl::format_real(s.p_max) << '\n'
            << "seconds=" << cl::format_real(seconds) << '\n';
  if (m.sweep.noise.sigma_n > 0.0 && s.clamped_observations * 100 > s.records) {
    std::cerr << "warning: " << s.clamped_observations << " of " << s.records
              << " observed R0 values were clamped to [0, 1]\n";
  }
}

void warn_small_cells(const std::vector<cl::EstimateRow>& rows, std::size_t min_cell_count) {
  for (const auto& row : rows) {
    if (row.report.small_cells > 0) {
      std::cerr << "warning: r0=" << cl::format_real(row.r0) << " sigma_q=" << cl::format_real(row.sigma_q)
                << " sigma_n=" << cl::format_real(row.sigma_n) << ": " << row.report.small_cells
                << " cells have fewer than " << min_cell_count << " records\n";
    }
  }
}

std::vector<cl::CascadeRecord> load_records(const cl::ExperimentManifest& m, const Flags& flags) {
  const std::filesystem::path path = flags.records.empty() ? m.records_path() : std::filesystem::path(flags.records);
  if (!std::filesystem::exists(path)) {
    throw cl::Error(cl::ErrorKind::InvalidConfig, "records file not found: " + path.string());
  }
  return cl::read_records_csv(path);
}

void run_estimate(const cl::ExperimentManifest& m, const Flags& flags) {
  const auto records = load_records(m, flags);
  const cl::Graph graph = cl::load_manifest_graph(m);
  const auto context = cl::make_estimate_context(m, graph, records);
  const auto rows = cl::estimate_all(records, context, m.analysis);
  const auto path = m.output_dir / "estimates.csv";
  cl::write_estimates_csv(rows, path);
  warn_small_cells(rows, m.analysis.min_cell_count);
  std::cout << "estimates: " << path.string() << '\n' << cl::kEstimateHeader << '\n';
  for (const auto& row : rows) std::cout << cl::estimate_csv_row(row) << '\n';
}

void run_sensitivity(const cl::ExperimentManifest& m, const Flags& flags) {
  const auto records = load_records(m, flags);
  const cl::Graph graph = cl::load_manifest_graph(m);
  const auto context = cl::make_estimate_context(m, graph, records);
  const auto rows = cl::sensitivity(records, context, m.analysis);
  const auto path = m.output_dir / "sensitivity.csv";
  cl::write_estimates_csv(rows, path);
  warn_small_cells(rows, m.analysis.min_cell_count);
  std::cout << "sensitivity: " << path.string() << '\n' << cl::kEstimateHeader << '\n';
  for (const auto& row : rows) std::cout << cl::estimate_csv_row(row) << '\n';
}

void run_sweep(const cl::ExperimentManifest& m) {
  const auto start = std::chrono::steady_clock::now();
  const auto summary = cl::sweep_step(m);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  print_sweep(summary, m, elapsed.count());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo limits on cascade-size predictability"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (overrides the manifest)");
    sub->add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "seed override (graph seed for gen-graph, experiment seed otherwise)");
  };

  auto* gen = app.add_subcommand("gen-graph", "generate the configuration-model graph");
  auto* sweep = app.add_subcommand("sweep", "simulate seeds x R0 grid x replicates");
  auto* estimate = app.add_subcommand("estimate", "R^2 per analysis point");
  auto* sens = app.add_subcommand("sensitivity", "R^2 against observation noise at a fixed R0");
  auto* all = app.add_subcommand("all", "gen-graph, sweep, estimate and sensitivity");
  for (auto* sub : {gen, sweep, estimate, sens, all}) add_common(sub);
  for (auto* sub : {estimate, sens}) sub->add_option("--records", flags.records, "records CSV (default from manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (gen->parsed()) {
      const auto m = manifest_from(flags, true);
      print_graph(cl::gen_graph_step(m), m);
    } else if (sweep->parsed()) {
      run_sweep(manifest_from(flags, false));
    } else if (estimate->parsed()) {
      run_estimate(manifest_from(flags, false), flags);
    } else if (sens->parsed()) {
      run_sensitivity(manifest_from(flags, false), flags);
    } else if (all->parsed()) {
      const auto m = manifest_from(flags, false);
      print_graph(cl::gen_graph_step(m), m);
      run_sweep(m);
      run_estimate(m, flags);
      run_sensitivity(m, flags);
    }
  } catch (const cl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == cl::ErrorKind::Io ? kRuntimeError : kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
