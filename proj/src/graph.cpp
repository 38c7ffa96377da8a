#include "cascade_limits/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'S', 'R', 'G', 'R', 'A', 'P', 'H'};
constexpr std::uint8_t kFormatVersion = 1;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

// Edges must be normalized (u < v), sorted and unique.
Graph csr_from_sorted_edges(std::uint64_t n_nodes,
                            const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::vector<std::uint64_t> offsets(n_nodes + 1, 0);
  for (const auto& [u, v] : edges) {
    ++offsets[u + 1];
    ++offsets[v + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<NodeId> neighbors(offsets.back());
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  // With edges sorted by (u, v), the first pass writes each node's smaller
  // neighbors in ascending order and the second its larger ones.
  for (const auto& [u, v] : edges) neighbors[cursor[v]++] = u;
  for (const auto& [u, v] : edges) neighbors[cursor[u]++] = v;
  return Graph(std::move(offsets), std::move(neighbors));
}

void put_u64(std::ostream& out, std::uint64_t value) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

void put_u32(std::ostream& out, std::uint32_t value) {
  std::array<char, 4> bytes{};
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) value = (value << 8) | bytes[i];
  return value;
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint32_t value = 0;
  for (int i = 3; i >= 0; --i) value = (value << 8) | bytes[i];
  return value;
}

}  // namespace

Degree GraphConfig::resolved_k_max() const {
  if (k_max != 0) return k_max;
  return static_cast<Degree>(std::min<std::uint64_t>(n_nodes - 1, std::numeric_limits<Degree>::max()));
}

void GraphConfig::validate() const {
  if (n_nodes < 2) invalid("n_nodes must be at least 2");
  if (n_nodes > std::numeric_limits<NodeId>::max()) invalid("n_nodes exceeds the 32-bit node id range");
  if (!(alpha > 1.0)) invalid("alpha must exceed 1");
  if (k_min < 1) invalid("k_min must be at least 1");
  const Degree upper = resolved_k_max();
  if (k_min > upper) invalid("k_min must not exceed k_max");
  if (upper > n_nodes - 1) invalid("k_max must not exceed n_nodes - 1");
}

GraphConfig with_structural_cutoff(GraphConfig config) {
  config.k_max = static_cast<Degree>(std::floor(std::sqrt(static_cast<double>(config.n_nodes))));
  config.k_max = std::max(config.k_max, config.k_min);
  return config;
}

Graph::Graph(std::vector<std::uint64_t> offsets, std::vector<NodeId> neighbors)
    : offsets_(std::move(offsets)), neighbors_(std::move(neighbors)) {
  if (offsets_.empty() || offsets_.back() != neighbors_.size() || neighbors_.size() % 2 != 0) {
    throw Error(ErrorKind::Precondition, "inconsistent CSR arrays");
  }
}

Graph graph_from_edges(std::uint64_t n_nodes, std::vector<std::pair<NodeId, NodeId>> edges) {
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  for (auto& e : edges) {
    if (e.first >= n_nodes || e.second >= n_nodes) {
      throw Error(ErrorKind::Precondition, "edge endpoint out of range");
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return csr_from_sorted_edges(n_nodes, edges);
}

DegreeSequence sample_degree_sequence(const GraphConfig& config, CounterStream& rng) {
  config.validate();
  const Degree k_max = config.resolved_k_max();
  std::vector<double> cumulative(k_max - config.k_min + 1);
  double total = 0.0;
  for (Degree k = config.k_min; k <= k_max; ++k) {
    total += std::pow(static_cast<double>(k), -config.alpha);
    cumulative[k - config.k_min] = total;
  }

  DegreeSequence out;
  out.degrees.resize(config.n_nodes);
  std::uint64_t stub_sum = 0;
  for (auto& degree : out.degrees) {
    const double x = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    degree = config.k_min + static_cast<Degree>(it - cumulative.begin());
    stub_sum += degree;
  }
  if (stub_sum % 2 != 0) {
    const auto node = static_cast<NodeId>(rng.below(config.n_nodes));
    ++out.degrees[node];
    out.parity_adjusted = node;
  }
  return out;
}

GraphBuild build_configuration_graph(std::span<const Degree> degrees, CounterStream& rng) {
  std::uint64_t stub_count = 0;
  for (Degree d : degrees) stub_count += d;
  if (stub_count % 2 != 0) throw Error(ErrorKind::Precondition, "degree sum must be even");

  std::vector<NodeId> stubs;
  stubs.reserve(stub_count);
  for (std::size_t node = 0; node < degrees.size(); ++node) {
    stubs.insert(stubs.end(), degrees[node], static_cast<NodeId>(node));
  }
  for (std::uint64_t i = stub_count; i > 1; --i) {
    std::swap(stubs[i - 1], stubs[rng.below(i)]);
  }

  GraphBuild build;
  build.requested_stubs = stub_count;
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(stub_count / 2);
  for (std::uint64_t i = 0; i < stub_count; i += 2) {
    NodeId u = stubs[i];
    NodeId v = stubs[i + 1];
    if (u == v) {
      ++build.self_loops_erased;
      continue;
    }
    if (u > v) std::swap(u, v);
    edges.emplace_back(u, v);
  }
  stubs.clear();
  stubs.shrink_to_fit();
  std::sort(edges.begin(), edges.end());
  const auto before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  build.multi_edges_erased = before - edges.size();
  build.graph = csr_from_sorted_edges(degrees.size(), edges);
  return build;
}

GeneratedGraph generate_graph(const GraphConfig& config) {
  config.validate();
  CounterStream degree_stream = derive_stream(config.rng_seed, kNoIndex, kNoIndex, 0);
  CounterStream matching_stream = derive_stream(config.rng_seed, kNoIndex, kNoIndex, 1);
  DegreeSequence sequence = sample_degree_sequence(config, degree_stream);
  GeneratedGraph out;
  out.build = build_configuration_graph(sequence.degrees, matching_stream);
  out.parity_adjusted = sequence.parity_adjusted;
  return out;
}

double mean_degree(const Graph& graph) noexcept {
  if (graph.n_nodes() == 0) return 0.0;
  return 2.0 * static_cast<double>(graph.n_edges()) / static_cast<double>(graph.n_nodes());
}

Degree degree_percentile(const Graph& graph, double percentile) {
  return DegreeIndex(graph).percentile(percentile);
}

DegreeIndex::DegreeIndex(const Graph& graph) {
  std::vector<Degree> degrees(graph.n_nodes());
  for (NodeId u = 0; u < graph.n_nodes(); ++u) degrees[u] = graph.degree(u);
  *this = DegreeIndex(std::span<const Degree>(degrees));
}

DegreeIndex::DegreeIndex(std::span<const Degree> degrees) : sorted_(degrees.begin(), degrees.end()) {
  if (sorted_.empty()) throw Error(ErrorKind::Precondition, "graph has no nodes");
  for (NodeId u = 0; u < sorted_.size(); ++u) by_degree_[sorted_[u]].push_back(u);
  std::sort(sorted_.begin(), sorted_.end());
}

Degree DegreeIndex::percentile(double percentile) const {
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw Error(ErrorKind::Domain, "percentile must lie in [0, 100]");
  }
  const auto n = static_cast<double>(sorted_.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted_.size());
  return sorted_[rank - 1];
}

const std::vector<NodeId>& DegreeIndex::nearest(Degree target) const {
  auto above = by_degree_.lower_bound(target);
  if (above != by_degree_.end() && above->first == target) return above->second;
  if (above == by_degree_.begin()) return above->second;
  auto below = std::prev(above);
  if (above == by_degree_.end()) return below->second;
  return (target - below->first <= above->first - target) ? below->second : above->second;
}

GraphCheck check_graph(const Graph& graph) {
  GraphCheck check;
  const auto& offsets = graph.offsets();
  const auto n = graph.n_nodes();
  check.offsets_consistent = offsets.back() == graph.flat_neighbors().size() &&
                             std::is_sorted(offsets.begin(), offsets.end());
  if (!check.offsets_consistent) {
    check.symmetric = false;
    return check;
  }
  for (NodeId u = 0; u < n; ++u) {
    auto list = graph.neighbors(u);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const NodeId v = list[i];
      if (v >= n) {
        ++check.out_of_range;
        check.symmetric = false;
        continue;
      }
      if (v == u) ++check.self_loops;
      if (i > 0 && list[i - 1] >= v) ++check.duplicate_entries;
      auto back = graph.neighbors(v);
      if (!std::binary_search(back.begin(), back.end(), u)) check.symmetric = false;
    }
  }
  return check;
}

GraphSummary summarize(const Graph& graph) {
  GraphSummary s;
  s.n_nodes = graph.n_nodes();
  s.n_edges = graph.n_edges();
  s.mean_degree = mean_degree(graph);
  if (s.n_nodes > 0) {
    s.min_degree = std::numeric_limits<Degree>::max();
    for (NodeId u = 0; u < s.n_nodes; ++u) {
      s.min_degree = std::min(s.min_degree, graph.degree(u));
      s.max_degree = std::max(s.max_degree, graph.degree(u));
    }
  }
  return s;
}

std::string format_summary(const GraphSummary& summary) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(9);
  out << "n_nodes=" << summary.n_nodes << '\n'
      << "n_edges=" << summary.n_edges << '\n'
      << "min_degree=" << summary.min_degree << '\n'
      << "mean_degree=" << summary.mean_degree << '\n'
      << "max_degree=" << summary.max_degree << '\n';
  return out.str();
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    out.put(static_cast<char>(kFormatVersion));
    put_u64(out, graph.n_nodes());
    put_u64(out, graph.n_edges());
    for (auto offset : graph.offsets()) put_u64(out, offset);
    for (auto v : graph.flat_neighbors()) put_u32(out, v);
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open graph file " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::Parse, "not a graph file: " + path.string());
  const int version = in.get();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::Parse, "unsupported graph file version " + std::to_string(version));
  }
  const std::uint64_t n_nodes = get_u64(in);
  const std::uint64_t n_edges = get_u64(in);
  if (!in || n_nodes > std::numeric_limits<NodeId>::max()) {
    throw Error(ErrorKind::Parse, "corrupt graph header in " + path.string());
  }
  std::vector<std::uint64_t> offsets(n_nodes + 1);
  for (auto& offset : offsets) offset = get_u64(in);
  if (!in || offsets.back() != 2 * n_edges) {
    throw Error(ErrorKind::Parse, "corrupt offsets in " + path.string());
  }
  std::vector<NodeId> neighbors(2 * n_edges);
  for (auto& v : neighbors) v = get_u32(in);
  if (!in) throw Error(ErrorKind::Parse, "truncated graph file " + path.string());
  return Graph(std::move(offsets), std::move(neighbors));
}

}  // namespace cascade_limits
