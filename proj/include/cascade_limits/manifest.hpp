#pragma once
// Experiment manifests: flat key = value text with [section] headers.
//
//   [graph]     n_nodes alpha k_min k_max(0 | sqrt | n) seed file
//   [seeding]   activity_table(default | path) n_seeds
//   [sweep]     r0_min r0_max r0_count replicates q_mean q_std sigma_n
//               noise_mode(per_cascade | per_cell) bin_width seed records
//               workers cells_per_batch
//   [analysis]  r0_points(grid | list) sigma_q_ratios sigma_n_ratios
//               sensitivity_r0 sensitivity_sigma_n_ratios min_cell_count
//               noisy_estimator(plugin | binned) noise_seed
//   [output]    dir
//
// '#' starts a comment. Relative paths resolve against the manifest's
// directory.

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "cascade_limits/graph.hpp"
#include "cascade_limits/sweep.hpp"

namespace cascade_limits {

enum class NoisyEstimator { Plugin, Binned };

struct AnalysisSpec {
  std::vector<double> r0_points;  // empty: every grid point
  std::vector<double> sigma_q_ratios{0.0};
  std::vector<double> sigma_n_ratios{0.0};
  double sensitivity_r0 = 0.3;
  std::vector<double> sensitivity_sigma_n_ratios{0.0, 0.1, 0.2, 0.3};
  std::size_t min_cell_count = 10;
  NoisyEstimator noisy_estimator = NoisyEstimator::Plugin;
  std::uint64_t noise_seed = 7;
};

struct ExperimentManifest {
  GraphConfig graph;
  std::filesystem::path graph_file = "graph.bin";
  std::string activity_table = "default";
  SweepConfig sweep;
  std::filesystem::path records_file = "records.csv";
  unsigned workers = 1;
  std::size_t cells_per_batch = 16;
  AnalysisSpec analysis;
  std::filesystem::path output_dir = "out";

  std::filesystem::path graph_path() const { return output_dir / graph_file; }
  std::filesystem::path records_path() const { return output_dir / records_file; }
  ActivityTable load_table() const;
};

ExperimentManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentManifest load_manifest(const std::filesystem::path& path);

// Comma-separated reals.
std::vector<double> parse_real_list(const std::string& text);

}  // namespace cascade_limits
