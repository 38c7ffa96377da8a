#include "cascade_limits/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw Error(ErrorKind::Parse, "activity table row " + std::to_string(row) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void ActivityTable::normalize() {
  if (rows.empty()) throw Error(ErrorKind::Parse, "activity table is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].weight > 0.0) || !std::isfinite(rows[i].weight)) row_error(i + 1, "weight must be positive");
    if (i > 0 && rows[i].degree <= rows[i - 1].degree) {
      row_error(i + 1, rows[i].degree == rows[i - 1].degree ? "duplicate degree"
                                                            : "degrees must be increasing");
    }
    total += rows[i].weight;
  }
  for (auto& row : rows) row.weight /= total;
  normalized = true;
}

std::vector<double> ActivityTable::midpoint_percentiles() const {
  std::vector<double> out;
  out.reserve(rows.size());
  double below = 0.0;
  double total = 0.0;
  for (const auto& row : rows) total += row.weight;
  for (const auto& row : rows) {
    const double w = row.weight / total;
    out.push_back(100.0 * (below + 0.5 * w));
    below += w;
  }
  return out;
}

ActivityTable load_activity_table(std::istream& in) {
  ActivityTable table;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (first) {
      first = false;
      if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
      if (view == "degree,weight") continue;
    }
    if (view.empty()) continue;
    ++row;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) row_error(row, "expected two comma-separated columns");
    const auto degree_text = trim(view.substr(0, comma));
    const auto weight_text = trim(view.substr(comma + 1));
    ActivityRow parsed;
    auto [dp, dec] = std::from_chars(degree_text.data(), degree_text.data() + degree_text.size(), parsed.degree);
    if (dec != std::errc{} || dp != degree_text.data() + degree_text.size()) row_error(row, "bad degree");
    auto [wp, wec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), parsed.weight);
    if (wec != std::errc{} || wp != weight_text.data() + weight_text.size()) row_error(row, "bad weight");
    if (!(parsed.weight > 0.0)) row_error(row, "weight must be positive");
    if (parsed.degree < 1) row_error(row, "degree must be positive");
    table.rows.push_back(parsed);
  }
  if (table.rows.empty()) throw Error(ErrorKind::Parse, "activity table is empty");
  table.normalize();
  return table;
}

ActivityTable load_activity_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open activity table " + path.string());
  return load_activity_table(in);
}

void save_activity_table(const ActivityTable& table, std::ostream& out) {
  out << "degree,weight\n";
  for (const auto& row : table.rows) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, row.weight, std::chars_format::general, 17);
    out << row.degree << ',' << std::string_view(buf, static_cast<std::size_t>(p - buf)) << '\n';
  }
}

ActivityTable default_activity_table() {
  ActivityTable table;
  for (int j = 0; j <= 20; ++j) {
    const Degree k = Degree{1} << j;
    table.rows.push_back({k, 1.0 / static_cast<double>(k)});
  }
  table.normalize();
  return table;
}

SeedDegree sample_seed_degree(const ActivityTable& table, CounterStream& rng) {
  double total = 0.0;
  for (const auto& row : table.rows) total += row.weight;
  const double x = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t pick = table.rows.size() - 1;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    cumulative += table.rows[i].weight;
    if (x < cumulative) {
      pick = i;
      break;
    }
  }
  // Same arithmetic as project_table so both land on identical degrees.
  const double percentile = table.midpoint_percentiles()[pick];
  return {table.rows[pick].degree, std::min(percentile, 100.0), pick};
}

NodeId pick_node_with_degree(const DegreeIndex& index, Degree target, CounterStream& rng) {
  const auto& nodes = index.nearest(target);
  return nodes[rng.below(nodes.size())];
}

NodeId pick_seed_node(const DegreeIndex& index, double percentile, CounterStream& rng) {
  return pick_node_with_degree(index, index.percentile(percentile), rng);
}

NodeId pick_seed_node(const Graph& graph, double percentile, CounterStream& rng) {
  return pick_seed_node(DegreeIndex(graph), percentile, rng);
}

std::vector<Seed> select_seeds(const Graph& graph, const DegreeIndex& index,
                               const ActivityTable& table, std::size_t n_seeds,
                               std::uint64_t experiment_seed) {
  std::vector<Seed> seeds;
  seeds.reserve(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    CounterStream rng = derive_stream(experiment_seed, i, kNoIndex, kNoIndex);
    const SeedDegree drawn = sample_seed_degree(table, rng);
    const NodeId node = pick_seed_node(index, drawn.percentile, rng);
    seeds.push_back({node, graph.degree(node)});
  }
  return seeds;
}

ActivityTable project_table(const ActivityTable& table, const DegreeIndex& index) {
  std::map<Degree, double> mass;
  const auto percentiles = table.midpoint_percentiles();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const Degree target = index.percentile(percentiles[i]);
    // The node actually picked has the nearest existing degree, which for a
    // percentile lookup is the target itself.
    mass[target] += table.rows[i].weight;
  }
  ActivityTable projected;
  for (const auto& [degree, weight] : mass) projected.rows.push_back({degree, weight});
  projected.normalize();
  return projected;
}

}  // namespace cascade_limits
