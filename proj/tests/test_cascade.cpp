#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "cascade_limits/cascade.hpp"
#include "cascade_limits/error.hpp"

using namespace cascade_limits;

namespace {

Graph star_graph(NodeId leaves) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return graph_from_edges(leaves + 1, edges);
}

Graph small_random_graph(std::uint64_t seed) {
  GraphConfig c;
  c.n_nodes = 3000;
  c.rng_seed = seed;
  return generate_graph(c).build.graph;
}

}  // namespace

TEST_CASE("edge probability") {
  CHECK(edge_probability(0.3, 10.0) == doctest::Approx(0.03));
  CHECK(edge_probability(0.0, 7.5) == 0.0);
  try {
    edge_probability(2.5, 2.0);
    FAIL("expected infeasible probability");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InfeasibleProbability);
  }
  CHECK_THROWS_AS(edge_probability(0.1, 0.0), Error);
}

TEST_CASE("no transmission at p = 0") {
  const Graph g = small_random_graph(1);
  CascadeEngine engine(g);
  for (NodeId seed = 0; seed < 50; ++seed) {
    const auto out = engine.run(seed, 0.0, seed + 1000);
    CHECK(out.size == 1);
    CHECK(out.rounds == 0);
    CHECK(out.retweets() == 0);
  }
}

TEST_CASE("certain transmission fills the component") {
  // triangle 0-1-2 with a tail 2-3, and a separate edge 4-5
  const Graph g = graph_from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {4, 5}});
  CascadeEngine engine(g);
  auto out = engine.run(0, 1.0, 1);
  CHECK(out.size == 4);
  CHECK(out.rounds == 2);
  out = engine.run(5, 1.0, 2);
  CHECK(out.size == 2);
  CHECK(out.rounds == 1);
}

TEST_CASE("star graph matches the enumeration of its 16 outcomes") {
  // Each of the 4 center-leaf transmissions succeeds or fails; size is one
  // plus the number of successes, every outcome with probability 1/16.
  double oracle_mean = 0.0;
  double oracle_sq = 0.0;
  for (unsigned mask = 0; mask < 16; ++mask) {
    const double size = 1.0 + std::popcount(mask);
    oracle_mean += size / 16.0;
    oracle_sq += size * size / 16.0;
  }
  REQUIRE(oracle_mean == 3.0);
  const double oracle_sd = std::sqrt(oracle_sq - oracle_mean * oracle_mean);

  const Graph g = star_graph(4);
  CascadeEngine engine(g);
  CounterStream rng(derive_stream(21, 0, 0, 0));
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto out = engine.run(0, 0.5, rng);
    REQUIRE(out.size >= 1);
    REQUIRE(out.size <= 5);
    REQUIRE(out.rounds == (out.size > 1 ? 1u : 0u));
    sum += static_cast<double>(out.size);
  }
  CHECK(std::abs(sum / n - oracle_mean) < 3 * oracle_sd / std::sqrt(double(n)));
}

TEST_CASE("common random numbers make size monotone in p") {
  const Graph g = small_random_graph(2);
  CascadeEngine engine(g);
  const double ps[] = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};
  for (std::uint64_t key = 0; key < 300; ++key) {
    const NodeId seed = static_cast<NodeId>(keyed_word(key, 99) % g.n_nodes());
    std::set<NodeId> previous;
    for (double p : ps) {
      engine.run(seed, p, key);
      std::set<NodeId> infected(engine.infected().begin(), engine.infected().end());
      REQUIRE(std::includes(infected.begin(), infected.end(), previous.begin(), previous.end()));
      previous = std::move(infected);
    }
  }
}

TEST_CASE("every infected node has a neighbour infected one round earlier") {
  const Graph g = small_random_graph(3);
  CascadeEngine engine(g);
  for (std::uint64_t key = 0; key < 200; ++key) {
    const NodeId seed = static_cast<NodeId>(key * 7 % g.n_nodes());
    const auto out = engine.run(seed, 0.4, key);
    const auto order = engine.infected();
    const auto starts = engine.round_starts();
    REQUIRE(order.size() == out.size);
    REQUIRE(order[0] == seed);
    REQUIRE(starts.size() == out.rounds + 2);
    REQUIRE(std::set<NodeId>(order.begin(), order.end()).size() == order.size());
    if (out.size > 1) REQUIRE(out.rounds <= out.size - 1);
    for (std::size_t r = 1; r <= out.rounds; ++r) {
      std::set<NodeId> before(order.begin() + starts[r - 1], order.begin() + starts[r]);
      for (std::size_t i = starts[r]; i < starts[r + 1]; ++i) {
        const auto nb = g.neighbors(order[i]);
        REQUIRE(std::any_of(nb.begin(), nb.end(), [&](NodeId v) { return before.contains(v); }));
      }
    }
  }
}

TEST_CASE("runs are reproducible from their key") {
  const Graph g = small_random_graph(4);
  CascadeEngine a(g);
  CascadeEngine b(g);
  for (std::uint64_t key = 0; key < 50; ++key) {
    const auto x = a.run(1, 0.3, key);
    b.run(2, 0.3, key + 1);  // interleaved work must not leak state
    const auto y = b.run(1, 0.3, key);
    CHECK(x.size == y.size);
    CHECK(x.rounds == y.rounds);
  }
  CounterStream rng(5);
  CHECK_THROWS_AS(run_cascade(g, static_cast<NodeId>(g.n_nodes()), 0.1, rng), Error);
}
