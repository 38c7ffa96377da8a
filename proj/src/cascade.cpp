#include "cascade_limits/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

double edge_probability(double r0, double mean_deg) {
  if (!(mean_deg > 0.0)) throw Error(ErrorKind::Precondition, "mean degree must be positive");
  if (!(r0 >= 0.0)) throw Error(ErrorKind::Domain, "R0 must be non-negative");
  if (r0 > mean_deg) {
    throw Error(ErrorKind::InfeasibleProbability,
                "R0 " + std::to_string(r0) + " exceeds mean degree " + std::to_string(mean_deg) +
                    "; edge probability would exceed 1");
  }
  return r0 / mean_deg;
}

CascadeEngine::CascadeEngine(const Graph& graph)
    : graph_(&graph), stamp_(graph.n_nodes(), 0) {}

CascadeOutcome CascadeEngine::run(NodeId seed, double p, std::uint64_t cascade_key) {
  if (seed >= graph_->n_nodes()) throw Error(ErrorKind::Precondition, "seed node out of range");
  if (++current_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    current_ = 1;
  }
  order_.clear();
  round_starts_.clear();
  order_.push_back(seed);
  stamp_[seed] = current_;
  round_starts_.push_back(0);
  round_starts_.push_back(1);

  // coin < p, compared on the raw 53-bit mantissa: m * 2^-53 < p <=> m < ceil(p * 2^53).
  const std::uint64_t threshold =
      p >= 1.0 ? (std::uint64_t{1} << 53)
               : static_cast<std::uint64_t>(std::ceil(std::max(p, 0.0) * 0x1.0p53));
  if (threshold == 0) return {1, 0};

  std::size_t begin = 0;
  std::size_t end = 1;
  while (begin < end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NodeId u = order_[i];
      const auto list = graph_->neighbors(u);
      const std::uint64_t arc0 = graph_->arc_begin(u);
      for (std::size_t j = 0; j < list.size(); ++j) {
        const NodeId v = list[j];
        if (stamp_[v] == current_) continue;
        if ((keyed_word(cascade_key, arc0 + j) >> 11) < threshold) {
          stamp_[v] = current_;
          order_.push_back(v);
        }
      }
    }
    begin = end;
    end = order_.size();
    if (begin < end) round_starts_.push_back(end);
  }
  return {order_.size(), round_starts_.size() - 2};
}

CascadeOutcome run_cascade(const Graph& graph, NodeId seed, double p, CounterStream& rng) {
  CascadeEngine engine(graph);
  return engine.run(seed, p, rng);
}

}  // namespace cascade_limits
