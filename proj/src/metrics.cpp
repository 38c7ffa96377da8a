#include "cascade_limits/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

struct CellAssignment {
  std::vector<std::size_t> cell_of;  // npos for zero-weight records
  std::vector<double> mean;
  std::vector<std::size_t> count;
};

constexpr std::size_t kNoCell = static_cast<std::size_t>(-1);

CellAssignment assign_cells(std::span<const CascadeRecord> records, const KeyFn& key) {
  std::map<CellKey, std::size_t> ids;
  CellAssignment out;
  out.cell_of.assign(records.size(), kNoCell);
  std::vector<CompensatedSum> weight_sum;
  std::vector<CompensatedSum> weighted_success;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.weight > 0.0)) continue;
    auto [it, inserted] = ids.try_emplace(key(r), ids.size());
    if (inserted) {
      weight_sum.emplace_back();
      weighted_success.emplace_back();
      out.count.push_back(0);
    }
    const std::size_t cell = it->second;
    out.cell_of[i] = cell;
    weight_sum[cell].add(r.weight);
    weighted_success[cell].add(r.weight * r.success());
    ++out.count[cell];
  }
  out.mean.resize(out.count.size());
  for (std::size_t c = 0; c < out.count.size(); ++c) {
    out.mean[c] = weighted_success[c].value() / weight_sum[c].value();
  }
  return out;
}

struct TotalMoments {
  double weight = 0.0;
  double variance = 0.0;
  bool constant = true;
  std::size_t used = 0;
};

TotalMoments total_moments(std::span<const CascadeRecord> records) {
  CompensatedSum w;
  CompensatedSum ws;
  TotalMoments out;
  double first = 0.0;
  for (const auto& r : records) {
    if (!(r.weight > 0.0)) continue;
    if (out.used == 0) first = r.success();
    if (r.success() != first) out.constant = false;
    ++out.used;
    w.add(r.weight);
    ws.add(r.weight * r.success());
  }
  if (out.used == 0) throw Error(ErrorKind::Domain, "no records with positive weight");
  out.weight = w.value();
  const double mean = ws.value() / out.weight;
  CompensatedSum ss;
  for (const auto& r : records) {
    if (!(r.weight > 0.0)) continue;
    const double d = r.success() - mean;
    ss.add(r.weight * d * d);
  }
  out.variance = out.constant ? 0.0 : ss.value() / out.weight;
  return out;
}

CellDiagnostics diagnostics(const CellAssignment& cells, std::size_t min_cell_count) {
  CellDiagnostics d;
  d.n_cells = cells.count.size();
  d.min_cell_count = cells.count.empty() ? 0 : *std::min_element(cells.count.begin(), cells.count.end());
  d.small_cells = static_cast<std::size_t>(std::count_if(
      cells.count.begin(), cells.count.end(), [&](std::size_t n) { return n < min_cell_count; }));
  return d;
}

EstimateReport finish_report(const TotalMoments& total, double cond_variance, const CellDiagnostics& cells) {
  EstimateReport report;
  report.total_variance = total.variance;
  report.cond_variance = cond_variance;
  report.n_cells = cells.n_cells;
  report.min_cell_count = cells.min_cell_count;
  report.small_cells = cells.small_cells;
  if (total.constant || !(total.variance > 0.0)) {
    report.undefined = true;
    report.f_statistic = std::nan("");
    report.r_squared = std::nan("");
    return report;
  }
  report.f_statistic = cond_variance / total.variance;
  report.r_squared = 1.0 - report.f_statistic;
  return report;
}

}  // namespace

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double weighted_variance(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw Error(ErrorKind::Domain, "weighted_variance of an empty sample");
  if (values.size() != weights.size()) throw Error(ErrorKind::Precondition, "values and weights differ in length");
  CompensatedSum w;
  CompensatedSum ws;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0.0) throw Error(ErrorKind::Domain, "negative weight");
    w.add(weights[i]);
    ws.add(weights[i] * values[i]);
  }
  if (!(w.value() > 0.0)) throw Error(ErrorKind::Domain, "weights sum to zero");
  const double mean = ws.value() / w.value();
  CompensatedSum ss;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    ss.add(weights[i] * d * d);
  }
  return ss.value() / w.value();
}

ConditionalVariance conditional_variance(std::span<const CascadeRecord> records, const KeyFn& key,
                                         std::size_t min_cell_count) {
  const CellAssignment cells = assign_cells(records, key);
  CompensatedSum w;
  CompensatedSum within;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t c = cells.cell_of[i];
    if (c == kNoCell) continue;
    const double d = records[i].success() - cells.mean[c];
    w.add(records[i].weight);
    within.add(records[i].weight * d * d);
  }
  if (!(w.value() > 0.0)) throw Error(ErrorKind::Domain, "no records with positive weight");
  return {within.value() / w.value(), diagnostics(cells, min_cell_count)};
}

std::vector<double> cell_mean_predictions(std::span<const CascadeRecord> records, const KeyFn& key) {
  const CellAssignment cells = assign_cells(records, key);
  std::vector<double> out(records.size(), 0.0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (cells.cell_of[i] != kNoCell) out[i] = cells.mean[cells.cell_of[i]];
  }
  return out;
}

EstimateReport f_statistic(std::span<const CascadeRecord> records, const KeyFn& key,
                           std::size_t min_cell_count) {
  const TotalMoments total = total_moments(records);
  const ConditionalVariance cond = conditional_variance(records, key, min_cell_count);
  return finish_report(total, cond.cond_variance, cond.cells);
}

KeyFn perfect_key() {
  return [](const CascadeRecord& r) {
    return CellKey{std::bit_cast<std::int64_t>(r.r0_true), static_cast<std::int64_t>(r.seed_node)};
  };
}

KeyFn noisy_key(double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::Domain, "bin width must be positive");
  return [bin_width](const CascadeRecord& r) {
    const auto bin = static_cast<std::int64_t>(std::floor(r.r0_observed / bin_width + 0.5));
    return CellKey{bin, static_cast<std::int64_t>(r.seed_node)};
  };
}

EstimateReport r2_perfect(std::span<const CascadeRecord> records, std::size_t min_cell_count) {
  return f_statistic(records, perfect_key(), min_cell_count);
}

EstimateReport r2_noisy(std::span<const CascadeRecord> records, double bin_width, std::size_t min_cell_count) {
  return f_statistic(records, noisy_key(bin_width), min_cell_count);
}

std::optional<double> r2_from_predictions(std::span<const double> predicted, std::span<const double> actual,
                                          std::span<const double> weights) {
  if (predicted.size() != actual.size() || actual.size() != weights.size()) {
    throw Error(ErrorKind::Precondition, "predicted, actual and weights differ in length");
  }
  const double total = weighted_variance(actual, weights);
  bool constant = true;
  bool seen = false;
  double first = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    if (!seen) {
      first = actual[i];
      seen = true;
    } else if (actual[i] != first) {
      constant = false;
    }
  }
  if (constant || !(total > 0.0)) return std::nullopt;
  CompensatedSum w;
  CompensatedSum residual;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = predicted[i] - actual[i];
    w.add(weights[i]);
    residual.add(weights[i] * d * d);
  }
  return 1.0 - (residual.value() / w.value()) / total;
}

std::size_t grid_index(std::span<const double> r0_grid, double r0) {
  if (r0_grid.empty()) throw Error(ErrorKind::Precondition, "R0 grid is empty");
  auto it = std::lower_bound(r0_grid.begin(), r0_grid.end(), r0);
  if (it == r0_grid.begin()) return 0;
  if (it == r0_grid.end()) return r0_grid.size() - 1;
  const auto hi = static_cast<std::size_t>(it - r0_grid.begin());
  return (r0 - r0_grid[hi - 1] <= r0_grid[hi] - r0) ? hi - 1 : hi;
}

EstimateReport r2_noisy_plugin(std::span<const CascadeRecord> records, std::span<const double> r0_grid,
                               std::size_t min_cell_count) {
  const std::size_t g = r0_grid.size();
  if (g == 0) throw Error(ErrorKind::Precondition, "R0 grid is empty");

  // Unweighted cell means along each seed's grid.
  std::map<NodeId, std::vector<std::pair<CompensatedSum, std::size_t>>> curves;
  for (const auto& r : records) {
    auto& curve = curves[r.seed_node];
    if (curve.empty()) curve.resize(g);
    auto& cell = curve[grid_index(r0_grid, r.r0_true)];
    cell.first.add(r.success());
    ++cell.second;
  }

  std::vector<double> predicted;
  std::vector<double> actual;
  std::vector<double> weights;
  std::map<std::pair<NodeId, std::size_t>, std::size_t> used_cells;
  auto mean_at = [&](NodeId u, std::size_t j) {
    const auto& cell = curves.at(u)[j];
    if (cell.second == 0) {
      throw Error(ErrorKind::Coverage, "no records for seed " + std::to_string(u) + " at R0 " +
                                           std::to_string(r0_grid[j]));
    }
    return cell.first.value() / static_cast<double>(cell.second);
  };
  for (const auto& r : records) {
    if (!(r.weight > 0.0)) continue;
    ++used_cells[{r.seed_node, grid_index(r0_grid, r.r0_true)}];
    const double x = r.r0_observed;
    double prediction = 0.0;
    if (x <= r0_grid.front()) {
      prediction = mean_at(r.seed_node, 0);
    } else if (x >= r0_grid.back()) {
      prediction = mean_at(r.seed_node, g - 1);
    } else {
      const auto hi = static_cast<std::size_t>(std::upper_bound(r0_grid.begin(), r0_grid.end(), x) - r0_grid.begin());
      const double t = (x - r0_grid[hi - 1]) / (r0_grid[hi] - r0_grid[hi - 1]);
      prediction = (1.0 - t) * mean_at(r.seed_node, hi - 1) + t * mean_at(r.seed_node, hi);
    }
    predicted.push_back(prediction);
    actual.push_back(r.success());
    weights.push_back(r.weight);
  }

  const TotalMoments total = total_moments(records);
  CompensatedSum w;
  CompensatedSum residual;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = predicted[i] - actual[i];
    w.add(weights[i]);
    residual.add(weights[i] * d * d);
  }
  CellDiagnostics cells;
  cells.n_cells = used_cells.size();
  cells.min_cell_count = std::numeric_limits<std::size_t>::max();
  for (const auto& [cell, n] : used_cells) {
    cells.min_cell_count = std::min(cells.min_cell_count, n);
    if (n < min_cell_count) ++cells.small_cells;
  }
  return finish_report(total, residual.value() / w.value(), cells);
}

PoststratifyReport poststratify(std::span<CascadeRecord> records, const ActivityTable& target_degrees,
                                const QualitySpec& target_quality, std::span<const double> r0_grid) {
  PoststratifyReport report;
  if (records.empty()) return report;
  const std::vector<double> cell_mass = grid_cell_masses(target_quality, r0_grid);

  std::map<Degree, double> degree_mass;
  double table_total = 0.0;
  for (const auto& row : target_degrees.rows) table_total += row.weight;
  for (const auto& row : target_degrees.rows) degree_mass[row.degree] = row.weight / table_total;

  std::map<std::pair<Degree, std::size_t>, std::size_t> sampled;
  std::vector<std::size_t> cell_of(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    cell_of[i] = grid_index(r0_grid, records[i].r0_true);
    ++sampled[{records[i].seed_degree, cell_of[i]}];
  }

  std::vector<std::string> missing;
  for (const auto& [degree, mass] : degree_mass) {
    if (!(mass > 0.0)) continue;
    for (std::size_t c = 0; c < r0_grid.size(); ++c) {
      if (cell_mass[c] > 0.0 && !sampled.contains({degree, c})) {
        std::ostringstream cell;
        cell << "(degree " << degree << ", R0 " << r0_grid[c] << ")";
        missing.push_back(cell.str());
      }
    }
  }
  if (!missing.empty()) {
    std::string what = "post-stratification target cells without records:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) what += " " + missing[i];
    if (missing.size() > 20) what += " ... (" + std::to_string(missing.size()) + " total)";
    throw Error(ErrorKind::Coverage, what);
  }

  const auto n = static_cast<double>(records.size());
  std::map<Degree, std::size_t> unmatched_degrees;
  CompensatedSum total;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    const auto it = degree_mass.find(r.seed_degree);
    const double target = (it == degree_mass.end() ? 0.0 : it->second) * cell_mass[cell_of[i]];
    if (it == degree_mass.end()) ++unmatched_degrees[r.seed_degree];
    const double frequency = static_cast<double>(sampled[{r.seed_degree, cell_of[i]}]) / n;
    r.weight = target / frequency;
    if (r.weight == 0.0) ++report.zero_weight_records;
    total.add(r.weight);
  }
  for (const auto& [degree, count] : unmatched_degrees) {
    report.warnings.push_back("seed degree " + std::to_string(degree) + " has no target mass; " +
                              std::to_string(count) + " records get zero weight");
  }
  if (!(total.value() > 0.0)) throw Error(ErrorKind::Coverage, "post-stratification left no positive weight");
  const double scale = n / total.value();
  for (auto& r : records) r.weight *= scale;
  return report;
}

}  // namespace cascade_limits
