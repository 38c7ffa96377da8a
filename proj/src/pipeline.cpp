#include "cascade_limits/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

constexpr std::uint64_t kNoiseSlot = 0;

}  // namespace

GraphStep gen_graph_step(const ExperimentManifest& manifest) {
  GraphStep step;
  step.generated = generate_graph(manifest.graph);
  const Graph& graph = step.generated.build.graph;
  step.summary = summarize(graph);
  step.graph_path = manifest.graph_path();
  step.summary_path = std::filesystem::path(step.graph_path).concat(".summary.txt");
  std::filesystem::create_directories(step.graph_path.parent_path());
  save_graph(graph, step.graph_path);

  std::ofstream out(step.summary_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + step.summary_path.string());
  out << format_summary(step.summary);
  out << "alpha=" << format_real(manifest.graph.alpha) << '\n'
      << "k_min=" << manifest.graph.k_min << '\n'
      << "k_max=" << manifest.graph.resolved_k_max() << '\n'
      << "rng_seed=" << manifest.graph.rng_seed << '\n'
      << "requested_stubs=" << step.generated.build.requested_stubs << '\n'
      << "self_loops_erased=" << step.generated.build.self_loops_erased << '\n'
      << "multi_edges_erased=" << step.generated.build.multi_edges_erased << '\n'
      << "parity_adjusted_node="
      << (step.generated.parity_adjusted ? std::to_string(*step.generated.parity_adjusted) : "none") << '\n';
  return step;
}

Graph load_manifest_graph(const ExperimentManifest& manifest) {
  const auto path = manifest.graph_path();
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::InvalidConfig, "graph file not found: " + path.string());
  }
  return load_graph(path);
}

SweepSummary sweep_step(const ExperimentManifest& manifest) {
  const Graph graph = load_manifest_graph(manifest);
  const ActivityTable table = manifest.load_table();
  SweepOptions options;
  options.workers = manifest.workers;
  options.cells_per_batch = manifest.cells_per_batch;
  std::filesystem::create_directories(manifest.records_path().parent_path());
  return run_sweep_to_csv(graph, table, manifest.sweep, options, manifest.records_path());
}

EstimateContext make_estimate_context(const ExperimentManifest& manifest, const Graph& graph,
                                      std::span<const CascadeRecord> records) {
  EstimateContext context;
  context.r0_grid = manifest.sweep.r0_grid();
  context.noise_mode = manifest.sweep.noise_mode;
  context.bin_width = manifest.sweep.resolved_bin_width();

  const ActivityTable projected = project_table(manifest.load_table(), DegreeIndex(graph));
  std::set<Degree> sampled;
  for (const auto& r : records) sampled.insert(r.seed_degree);
  for (const auto& row : projected.rows) {
    if (sampled.contains(row.degree)) context.target_degrees.rows.push_back(row);
  }
  if (context.target_degrees.rows.empty()) {
    throw Error(ErrorKind::Coverage, "no sampled seed degree carries target mass");
  }
  context.target_degrees.normalize();
  return context;
}

EstimateRow estimate_point(std::span<const CascadeRecord> records, const EstimateContext& context,
                           const AnalysisSpec& analysis, double r0, double sigma_q, double sigma_n) {
  std::vector<CascadeRecord> weighted(records.begin(), records.end());
  poststratify(weighted, context.target_degrees, QualitySpec{r0, sigma_q}, context.r0_grid);
  EstimateRow row{r0, sigma_q, sigma_n, {}};
  if (sigma_n == 0.0) {
    row.report = r2_perfect(weighted, analysis.min_cell_count);
    return row;
  }
  reobserve(weighted, NoiseSpec{sigma_n}, context.noise_mode, analysis.noise_seed, kNoiseSlot);
  row.report = analysis.noisy_estimator == NoisyEstimator::Plugin
                   ? r2_noisy_plugin(weighted, context.r0_grid, analysis.min_cell_count)
                   : r2_noisy(weighted, context.bin_width, analysis.min_cell_count);
  return row;
}

std::vector<EstimateRow> estimate_all(std::span<const CascadeRecord> records, const EstimateContext& context,
                                      const AnalysisSpec& analysis) {
  const std::vector<double>& points = analysis.r0_points.empty() ? context.r0_grid : analysis.r0_points;
  std::vector<EstimateRow> rows;
  for (double r0 : points) {
    for (double q_ratio : analysis.sigma_q_ratios) {
      for (double n_ratio : analysis.sigma_n_ratios) {
        rows.push_back(estimate_point(records, context, analysis, r0, q_ratio * r0, n_ratio * r0));
      }
    }
  }
  return rows;
}

std::vector<EstimateRow> sensitivity(std::span<const CascadeRecord> records, const EstimateContext& context,
                                     const AnalysisSpec& analysis) {
  std::vector<EstimateRow> rows;
  const double r0 = analysis.sensitivity_r0;
  for (double n_ratio : analysis.sensitivity_sigma_n_ratios) {
    rows.push_back(estimate_point(records, context, analysis, r0, 0.0, n_ratio * r0));
  }
  return rows;
}

std::string estimate_csv_row(const EstimateRow& row) {
  const auto& r = row.report;
  auto real = [](double v) { return std::isnan(v) ? std::string("nan") : format_real(v); };
  std::ostringstream out;
  out << format_real(row.r0) << ',' << format_real(row.sigma_q) << ',' << format_real(row.sigma_n) << ','
      << real(r.r_squared) << ',' << real(r.f_statistic) << ',' << real(r.total_variance) << ','
      << real(r.cond_variance) << ',' << r.n_cells << ',' << r.min_cell_count << ',' << (r.undefined ? 1 : 0);
  return out.str();
}

void write_estimates_csv(const std::vector<EstimateRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << kEstimateHeader << '\n';
  for (const auto& row : rows) out << estimate_csv_row(row) << '\n';
}

std::string format_report(const EstimateReport& r) {
  std::ostringstream out;
  auto real = [](double v) { return std::isnan(v) ? std::string("nan") : format_real(v); };
  out << "total_variance=" << real(r.total_variance) << '\n'
      << "cond_variance=" << real(r.cond_variance) << '\n'
      << "r_squared=" << real(r.r_squared) << '\n'
      << "f_statistic=" << real(r.f_statistic) << '\n'
      << "n_cells=" << r.n_cells << '\n'
      << "min_cell_count=" << r.min_cell_count << '\n'
      << "small_cells=" << r.small_cells << '\n'
      << "undefined=" << (r.undefined ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace cascade_limits
