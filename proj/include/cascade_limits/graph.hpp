#pragma once
// Power-law configuration-model graphs in compressed sparse row form.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade_limits/rng.hpp"

namespace cascade_limits {

using NodeId = std::uint32_t;
using Degree = std::uint32_t;

struct GraphConfig {
  std::uint64_t n_nodes = 100000;
  double alpha = 2.05;
  Degree k_min = 1;
  Degree k_max = 0;  // 0 selects n_nodes - 1
  std::uint64_t rng_seed = 1;

  // Largest admissible degree after resolving the default.
  Degree resolved_k_max() const;
  // Throws Error(InvalidConfig) naming the first violated constraint.
  void validate() const;
};

// Preset for correlation-free validation runs: k_max = floor(sqrt(n)).
GraphConfig with_structural_cutoff(GraphConfig config);

// Immutable undirected graph. Neighbor lists are sorted ascending.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<std::uint64_t> offsets, std::vector<NodeId> neighbors);

  std::uint64_t n_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::uint64_t n_edges() const noexcept { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  Degree degree(NodeId u) const noexcept {
    return static_cast<Degree>(offsets_[u + 1] - offsets_[u]);
  }
  // Position of u's first arc in the flat neighbor array.
  std::uint64_t arc_begin(NodeId u) const noexcept { return offsets_[u]; }

  const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& flat_neighbors() const noexcept { return neighbors_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::uint64_t> offsets_{0};
  std::vector<NodeId> neighbors_;
};

// Builds a graph from an undirected edge list. Self-loops and duplicates are
// dropped.
Graph graph_from_edges(std::uint64_t n_nodes, std::vector<std::pair<NodeId, NodeId>> edges);

struct DegreeSequence {
  std::vector<Degree> degrees;
  // Node whose degree was incremented to make the stub count even.
  std::optional<NodeId> parity_adjusted;
};

DegreeSequence sample_degree_sequence(const GraphConfig& config, CounterStream& rng);

struct GraphBuild {
  Graph graph;
  std::uint64_t requested_stubs = 0;
  std::uint64_t self_loops_erased = 0;
  std::uint64_t multi_edges_erased = 0;
};

GraphBuild build_configuration_graph(std::span<const Degree> degrees, CounterStream& rng);

// Degree sampling plus stub matching, both driven by config.rng_seed.
struct GeneratedGraph {
  GraphBuild build;
  std::optional<NodeId> parity_adjusted;
};
GeneratedGraph generate_graph(const GraphConfig& config);

double mean_degree(const Graph& graph) noexcept;

// Nearest-rank percentile of the degree multiset.
Degree degree_percentile(const Graph& graph, double percentile);

// Sorted degrees plus the nodes of each degree. Built once per graph for
// repeated percentile lookups and seed selection.
class DegreeIndex {
 public:
  explicit DegreeIndex(const Graph& graph);
  // Node ids are positions in `degrees`.
  explicit DegreeIndex(std::span<const Degree> degrees);

  Degree percentile(double percentile) const;
  Degree min_degree() const { return sorted_.front(); }
  Degree max_degree() const { return sorted_.back(); }
  const std::map<Degree, std::vector<NodeId>>& by_degree() const noexcept { return by_degree_; }
  // Nodes with the degree closest to target; ties go to the smaller degree.
  const std::vector<NodeId>& nearest(Degree target) const;

 private:
  std::vector<Degree> sorted_;
  std::map<Degree, std::vector<NodeId>> by_degree_;
};

struct GraphCheck {
  bool symmetric = true;
  std::uint64_t self_loops = 0;
  std::uint64_t duplicate_entries = 0;
  std::uint64_t out_of_range = 0;
  bool offsets_consistent = true;

  bool clean() const noexcept {
    return symmetric && self_loops == 0 && duplicate_entries == 0 && out_of_range == 0 &&
           offsets_consistent;
  }
};

// Full scan of the structural invariants.
GraphCheck check_graph(const Graph& graph);

struct GraphSummary {
  std::uint64_t n_nodes = 0;
  std::uint64_t n_edges = 0;
  Degree min_degree = 0;
  double mean_degree = 0.0;
  Degree max_degree = 0;
};

GraphSummary summarize(const Graph& graph);
std::string format_summary(const GraphSummary& summary);

// Binary format: 8-byte magic, version byte, n_nodes and n_edges as u64, then
// offsets (u64) and neighbors (u32). Little-endian throughout.
void save_graph(const Graph& graph, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

}  // namespace cascade_limits
