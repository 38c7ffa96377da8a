#pragma once
// Seeds x R0 grid x replicates Monte Carlo design.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cascade_limits/graph.hpp"
#include "cascade_limits/metrics.hpp"
#include "cascade_limits/quality.hpp"
#include "cascade_limits/seeding.hpp"

namespace cascade_limits {

enum class NoiseMode {
  PerCascade,  // fresh observation for every cascade
  PerCell,     // one observation shared by all replicates of a (seed, R0) cell
};

struct SweepConfig {
  std::size_t n_seeds = 500;
  double r0_min = 0.05;
  double r0_max = 0.5;
  std::size_t r0_count = 10;
  std::size_t replicates = 200;
  QualitySpec quality;
  NoiseSpec noise;
  NoiseMode noise_mode = NoiseMode::PerCascade;
  double bin_width = 0.0;  // 0 selects the grid spacing
  std::uint64_t experiment_seed = 1;

  void validate() const;
  std::vector<double> r0_grid() const;
  double resolved_bin_width() const;
  std::uint64_t record_count() const { return n_seeds * r0_count * replicates; }
};

struct SweepOptions {
  unsigned workers = 1;
  // (seed, R0) cells per batch.
  std::size_t cells_per_batch = 16;
};

struct SweepSummary {
  std::uint64_t records = 0;
  std::size_t batches = 0;
  double mean_degree = 0.0;
  double p_max = 0.0;
  std::uint64_t clamped_observations = 0;
  std::vector<Seed> seeds;
};

// Receives each finished batch. Called from worker threads, possibly
// concurrently, with batches in no particular order.
using BatchSink = std::function<void(std::size_t batch_index, std::vector<CascadeRecord>&& batch)>;

// Batches cover consecutive cells in (seed_index, r0_index) order; records
// within a batch are ordered by (seed_index, r0_index, replicate).
SweepSummary run_sweep(const Graph& graph, const ActivityTable& table, const SweepConfig& config,
                       const SweepOptions& options, const BatchSink& sink);

// All records in canonical order.
std::vector<CascadeRecord> run_sweep(const Graph& graph, const ActivityTable& table,
                                     const SweepConfig& config, const SweepOptions& options,
                                     SweepSummary* summary = nullptr);

// Writes each batch to <dir>/parts atomically, then merges the parts in order
// into `records_path` and removes them.
SweepSummary run_sweep_to_csv(const Graph& graph, const ActivityTable& table, const SweepConfig& config,
                              const SweepOptions& options, const std::filesystem::path& records_path);

// Decimal with 9 significant digits, '.' separator, locale-independent.
std::string format_real(double value);
// The value a real takes after a format_real round trip.
double round_real(double value);

inline constexpr const char* kRecordHeader =
    "seed_node,seed_degree,r0_true,r0_observed,replicate,size,retweets,rounds,weight";

void write_record_row(std::ostream& out, const CascadeRecord& record);
void write_records_csv(const std::vector<CascadeRecord>& records, const std::filesystem::path& path);
std::vector<CascadeRecord> read_records_csv(const std::filesystem::path& path);

// Fresh observations of r0_true for every record, keyed on (noise_seed, slot,
// record position) or, per cell, on (noise_seed, slot, seed node, r0_true).
// Returns the number of observations clamped to 0 or 1.
std::uint64_t reobserve(std::span<CascadeRecord> records, const NoiseSpec& noise, NoiseMode mode,
                        std::uint64_t noise_seed, std::uint64_t slot);

}  // namespace cascade_limits
