#pragma once
// Round-synchronous SIR / independent-cascade simulation.
//
// Each infectious node gets exactly one transmission attempt per susceptible
// neighbor, during the round after its own infection. The coin for the
// attempt over arc a (a position in the flat neighbor array) is
// to_unit(keyed_word(cascade_key, a)), so an entire cascade is a function of
// (graph, seed, p, cascade_key). Reusing a key across different p gives
// common random numbers: the infected set grows monotonically in p.

#include <cstdint>
#include <span>
#include <vector>

#include "cascade_limits/graph.hpp"
#include "cascade_limits/rng.hpp"

namespace cascade_limits {

struct CascadeOutcome {
  std::uint64_t size = 1;  // infected nodes, seed included
  std::uint64_t rounds = 0;

  std::uint64_t retweets() const noexcept { return size - 1; }
};

// Per-edge transmission probability giving a node of mean degree an expected
// r0 first-generation infections.
double edge_probability(double r0, double mean_deg);

// Scratch state for repeated cascades on one graph. Not thread-safe; give
// each worker its own engine. The graph must outlive the engine.
class CascadeEngine {
 public:
  explicit CascadeEngine(const Graph& graph);

  CascadeOutcome run(NodeId seed, double p, std::uint64_t cascade_key);

  // Draws the cascade key from rng.
  CascadeOutcome run(NodeId seed, double p, CounterStream& rng) { return run(seed, p, rng()); }

  // Nodes infected by the last run, in infection order.
  std::span<const NodeId> infected() const noexcept { return order_; }
  // infected()[round_starts()[r] .. round_starts()[r + 1]) were infected in
  // round r; round 0 holds the seed alone.
  std::span<const std::size_t> round_starts() const noexcept { return round_starts_; }

 private:
  const Graph* graph_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t current_ = 0;
  std::vector<NodeId> order_;
  std::vector<std::size_t> round_starts_;
};

CascadeOutcome run_cascade(const Graph& graph, NodeId seed, double p, CounterStream& rng);

}  // namespace cascade_limits
