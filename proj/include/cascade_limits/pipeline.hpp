#pragma once
// End-to-end steps behind the command-line subcommands.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cascade_limits/manifest.hpp"
#include "cascade_limits/metrics.hpp"

namespace cascade_limits {

struct GraphStep {
  GeneratedGraph generated;
  GraphSummary summary;
  std::filesystem::path graph_path;
  std::filesystem::path summary_path;
};

// Writes the graph file and "<graph file>.summary.txt".
GraphStep gen_graph_step(const ExperimentManifest& manifest);

Graph load_manifest_graph(const ExperimentManifest& manifest);

SweepSummary sweep_step(const ExperimentManifest& manifest);

struct EstimateRow {
  double r0 = 0.0;
  double sigma_q = 0.0;
  double sigma_n = 0.0;
  EstimateReport report;
};

struct EstimateContext {
  std::vector<double> r0_grid;
  ActivityTable target_degrees;  // projected onto the graph, restricted to sampled seed degrees
  NoiseMode noise_mode = NoiseMode::PerCascade;
  double bin_width = 1.0;
};

EstimateContext make_estimate_context(const ExperimentManifest& manifest, const Graph& graph,
                                      std::span<const CascadeRecord> records);

// One analysis point: post-stratify to Beta(r0, sigma_q) over the grid, then
// condition on (R0, seed) when sigma_n == 0 or on the noisy estimate
// otherwise. Noise deviates depend only on analysis.noise_seed and the record
// position, so every sigma_n reuses the same standard-normal draws.
EstimateRow estimate_point(std::span<const CascadeRecord> records, const EstimateContext& context,
                           const AnalysisSpec& analysis, double r0, double sigma_q, double sigma_n);

// Every (r0 point, sigma_q ratio, sigma_n ratio) of the analysis spec.
std::vector<EstimateRow> estimate_all(std::span<const CascadeRecord> records, const EstimateContext& context,
                                      const AnalysisSpec& analysis);

// sigma_q = 0 at sensitivity_r0 across the sensitivity sigma_n ratios.
std::vector<EstimateRow> sensitivity(std::span<const CascadeRecord> records, const EstimateContext& context,
                                     const AnalysisSpec& analysis);

inline constexpr const char* kEstimateHeader =
    "r0,sigma_q,sigma_n,r_squared,f_statistic,total_var,cond_var,n_cells,min_cell_count,undefined";

std::string estimate_csv_row(const EstimateRow& row);
void write_estimates_csv(const std::vector<EstimateRow>& rows, const std::filesystem::path& path);
// Flat key=value block.
std::string format_report(const EstimateReport& report);

}  // namespace cascade_limits
