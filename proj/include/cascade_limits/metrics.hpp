#pragma once
// Skill/luck variance decomposition.
//
// F = E[Var(S | key)] / Var(S) is the fraction of outcome variance left after
// conditioning on a cell key, and R^2 = 1 - F. All variances are population
// (divide-by-total-weight) variances and every sum is compensated, so results
// agree to ~1e-12 regardless of record order. Records with zero weight are
// ignored.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cascade_limits/graph.hpp"
#include "cascade_limits/quality.hpp"
#include "cascade_limits/seeding.hpp"

namespace cascade_limits {

struct CascadeRecord {
  NodeId seed_node = 0;
  Degree seed_degree = 0;
  double r0_true = 0.0;
  double r0_observed = 0.0;
  std::uint32_t replicate = 0;
  std::uint64_t size = 1;
  std::uint64_t rounds = 0;
  double weight = 1.0;

  std::uint64_t retweets() const noexcept { return size - 1; }
  // Success measure S: the retweet count.
  double success() const noexcept { return static_cast<double>(size - 1); }

  friend bool operator==(const CascadeRecord&, const CascadeRecord&) = default;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double weighted_variance(std::span<const double> values, std::span<const double> weights);

using CellKey = std::pair<std::int64_t, std::int64_t>;
using KeyFn = std::function<CellKey(const CascadeRecord&)>;

struct CellDiagnostics {
  std::size_t n_cells = 0;
  std::size_t min_cell_count = 0;
  std::size_t small_cells = 0;  // cells below the configured minimum
};

struct ConditionalVariance {
  double cond_variance = 0.0;
  CellDiagnostics cells;
};

ConditionalVariance conditional_variance(std::span<const CascadeRecord> records, const KeyFn& key,
                                         std::size_t min_cell_count = 10);

// Weighted cell mean of each record's cell (0 for zero-weight records).
std::vector<double> cell_mean_predictions(std::span<const CascadeRecord> records, const KeyFn& key);

struct EstimateReport {
  double total_variance = 0.0;
  double cond_variance = 0.0;
  double r_squared = 0.0;
  double f_statistic = 0.0;
  std::size_t n_cells = 0;
  std::size_t min_cell_count = 0;
  std::size_t small_cells = 0;
  bool undefined = false;
};

// F over a key; undefined when successes do not vary.
EstimateReport f_statistic(std::span<const CascadeRecord> records, const KeyFn& key,
                           std::size_t min_cell_count = 10);

// Cells keyed by (true R0, seed node).
KeyFn perfect_key();
// Cells keyed by (observed R0 bin, seed node); bin k covers
// [(k - 1/2) w, (k + 1/2) w), so grid points on multiples of w are bin centers.
KeyFn noisy_key(double bin_width);

EstimateReport r2_perfect(std::span<const CascadeRecord> records, std::size_t min_cell_count = 10);
EstimateReport r2_noisy(std::span<const CascadeRecord> records, double bin_width,
                        std::size_t min_cell_count = 10);

// Noisy-knowledge predictor: the perfect-knowledge cell means E[S | R0, u],
// estimated from all records regardless of weight, interpolated linearly in R0
// along each seed's grid and evaluated at the observed R0 (held constant
// beyond the grid ends). Scored with r2_from_predictions on positive-weight
// records.
EstimateReport r2_noisy_plugin(std::span<const CascadeRecord> records, std::span<const double> r0_grid,
                               std::size_t min_cell_count = 10);

std::optional<double> r2_from_predictions(std::span<const double> predicted, std::span<const double> actual,
                                          std::span<const double> weights);

// Index of the grid point nearest to r0.
std::size_t grid_index(std::span<const double> r0_grid, double r0);

struct PoststratifyReport {
  std::size_t zero_weight_records = 0;
  std::vector<std::string> warnings;
};

// Reweights records so their (seed degree, R0 cell) frequencies match the
// product of the target degree table and the quality distribution's grid-cell
// masses. Weights are rescaled to sum to the record count. Throws
// Error(Coverage) when a target cell with positive mass has no records.
PoststratifyReport poststratify(std::span<CascadeRecord> records, const ActivityTable& target_degrees,
                                const QualitySpec& target_quality, std::span<const double> r0_grid);

}  // namespace cascade_limits
