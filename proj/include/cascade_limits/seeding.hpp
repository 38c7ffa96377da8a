#pragma once
// Seed selection from a degree-activity distribution.
//
// A seed degree is drawn from the activity table by inverse transform; its
// position in the table's CDF (row midpoint) is carried over to the simulated
// graph as a degree percentile, and a node of that degree is picked uniformly.

#include <filesystem>
#include <istream>
#include <vector>

#include "cascade_limits/graph.hpp"
#include "cascade_limits/rng.hpp"

namespace cascade_limits {

struct ActivityRow {
  Degree degree = 1;
  double weight = 1.0;
};

struct ActivityTable {
  std::vector<ActivityRow> rows;  // strictly increasing degree
  bool normalized = false;

  // Validates row order and weights, then scales weights to sum to one.
  void normalize();
  // CDF midpoint of each row, in percent.
  std::vector<double> midpoint_percentiles() const;
};

// Two comma-separated columns, optional "degree,weight" header. Row numbers in
// error messages count data rows from 1.
ActivityTable load_activity_table(std::istream& in);
ActivityTable load_activity_table(const std::filesystem::path& path);

void save_activity_table(const ActivityTable& table, std::ostream& out);

// Buckets at 1, 2, 4, ..., 2^20 with weight proportional to 1/k.
ActivityTable default_activity_table();

struct SeedDegree {
  Degree degree = 0;
  double percentile = 0.0;
  std::size_t row = 0;
};

SeedDegree sample_seed_degree(const ActivityTable& table, CounterStream& rng);

// Uniform node among those whose degree is nearest to target (ties toward the
// smaller degree).
NodeId pick_node_with_degree(const DegreeIndex& index, Degree target, CounterStream& rng);

NodeId pick_seed_node(const DegreeIndex& index, double percentile, CounterStream& rng);
NodeId pick_seed_node(const Graph& graph, double percentile, CounterStream& rng);

struct Seed {
  NodeId node = 0;
  Degree degree = 0;
};

// n_seeds independent draws (with replacement).
std::vector<Seed> select_seeds(const Graph& graph, const DegreeIndex& index,
                               const ActivityTable& table, std::size_t n_seeds,
                               std::uint64_t experiment_seed);

// The table pushed through percentile matching onto the graph: rows are graph
// degrees, weights the table mass mapped onto each. This is the target seed
// degree distribution on the simulated graph.
ActivityTable project_table(const ActivityTable& table, const DegreeIndex& index);

}  // namespace cascade_limits
