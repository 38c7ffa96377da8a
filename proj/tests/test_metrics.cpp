#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "cascade_limits/error.hpp"
#include "cascade_limits/metrics.hpp"
#include "cascade_limits/rng.hpp"

using namespace cascade_limits;

namespace {

CascadeRecord rec(NodeId seed, double r0, std::uint64_t retweets, double weight = 1.0) {
  CascadeRecord r;
  r.seed_node = seed;
  r.seed_degree = seed + 1;
  r.r0_true = r0;
  r.r0_observed = r0;
  r.size = retweets + 1;
  r.weight = weight;
  return r;
}

// Cells A:[1,3], B:[3,5].
std::vector<CascadeRecord> two_cells() {
  return {rec(0, 0.1, 1), rec(0, 0.1, 3), rec(1, 0.1, 3), rec(1, 0.1, 5)};
}

// A synthetic sweep: 40 seeds x 6 grid points x 30 replicates with sizes
// growing in degree and R0 plus noise.
std::vector<CascadeRecord> synthetic(std::uint64_t key, std::vector<double> grid = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
  std::vector<CascadeRecord> out;
  CounterStream rng(key);
  for (NodeId s = 0; s < 40; ++s) {
    for (double r0 : grid) {
      for (std::uint32_t k = 0; k < 30; ++k) {
        CascadeRecord r = rec(s, r0, 0);
        r.seed_degree = 1 + s % 7;
        r.replicate = k;
        const double mean = r.seed_degree * r0 * 10.0;
        r.size = 1 + static_cast<std::uint64_t>(mean * 2.0 * rng.uniform() + (rng.uniform() < 0.05 ? 40 : 0));
        r.weight = 0.5 + rng.uniform();
        out.push_back(r);
      }
    }
  }
  return out;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("weighted variance") {
  const std::vector<double> ones{1, 1, 1};
  CHECK(weighted_variance(std::vector<double>{3, 3, 3}, ones) == 0.0);
  CHECK(weighted_variance(std::vector<double>{0, 2}, std::vector<double>{1, 1}) == 1.0);
  CHECK(weighted_variance(std::vector<double>{1, 3}, std::vector<double>{3, 1}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(weighted_variance(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("conditional variance") {
  auto records = two_cells();
  CHECK(conditional_variance(records, perfect_key()).cond_variance == doctest::Approx(1.0));
  const KeyFn one_cell = [](const CascadeRecord&) { return CellKey{0, 0}; };
  std::vector<double> values;
  std::vector<double> weights;
  for (const auto& r : records) {
    values.push_back(r.success());
    weights.push_back(r.weight);
  }
  CHECK(conditional_variance(records, one_cell).cond_variance ==
        doctest::Approx(weighted_variance(values, weights)));
  const KeyFn own_cell = [](const CascadeRecord& r) { return CellKey{r.seed_node, std::int64_t(r.size)}; };
  CHECK(conditional_variance(records, own_cell).cond_variance == 0.0);
  const auto diag = conditional_variance(records, perfect_key(), 3).cells;
  CHECK(diag.n_cells == 2);
  CHECK(diag.min_cell_count == 2);
  CHECK(diag.small_cells == 2);
}

TEST_CASE("F statistic hand examples") {
  std::vector<CascadeRecord> skill{rec(0, 0.1, 2), rec(0, 0.1, 2), rec(1, 0.1, 4), rec(1, 0.1, 4)};
  CHECK(f_statistic(skill, perfect_key()).f_statistic == 0.0);
  const KeyFn one_cell = [](const CascadeRecord&) { return CellKey{0, 0}; };
  CHECK(f_statistic(two_cells(), one_cell).f_statistic == doctest::Approx(1.0));
  const auto report = r2_perfect(two_cells());
  CHECK(report.f_statistic == doctest::Approx(0.5));
  CHECK(report.r_squared == doctest::Approx(0.5));
  CHECK(report.total_variance == doctest::Approx(2.0));
  CHECK_FALSE(report.undefined);
}

TEST_CASE("constant successes are undefined") {
  std::vector<CascadeRecord> flat{rec(0, 0.1, 0), rec(1, 0.2, 0), rec(2, 0.3, 0)};
  const auto report = r2_perfect(flat);
  CHECK(report.undefined);
  CHECK(std::isnan(report.r_squared));
  CHECK(std::isnan(report.f_statistic));
}

TEST_CASE("R squared from predictions") {
  const std::vector<double> actual{1, 3, 3, 5};
  const std::vector<double> w(4, 1.0);
  CHECK(*r2_from_predictions(actual, actual, w) == 1.0);
  CHECK(*r2_from_predictions(std::vector<double>(4, 3.0), actual, w) == doctest::Approx(0.0));
  CHECK(*r2_from_predictions(std::vector<double>{2, 2, 4, 4}, actual, w) == doctest::Approx(0.5));
  CHECK_FALSE(r2_from_predictions(actual, std::vector<double>(4, 1.0), w));
}

TEST_CASE("sizes fixed within cells are fully explained") {
  std::vector<CascadeRecord> records;
  for (NodeId s = 0; s < 5; ++s)
    for (int k = 0; k < 4; ++k) records.push_back(rec(s, 0.2, s * 3));
  CHECK(r2_perfect(records).r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no information gives R squared near zero") {
  std::vector<CascadeRecord> records;
  CounterStream rng(41);
  for (NodeId s = 0; s < 100; ++s)
    for (int k = 0; k < 100; ++k) records.push_back(rec(s, 0.2, rng.below(20)));
  CHECK(std::abs(r2_perfect(records).r_squared) < 0.02);
}

TEST_CASE("one minus F equals R squared of the cell-mean predictor") {
  for (std::uint64_t key = 1; key <= 5; ++key) {
    const auto records = synthetic(key);
    const auto report = r2_perfect(records);
    const auto pred = cell_mean_predictions(records, perfect_key());
    std::vector<double> actual;
    std::vector<double> weights;
    for (const auto& r : records) {
      actual.push_back(r.success());
      weights.push_back(r.weight);
    }
    const auto r2 = r2_from_predictions(pred, actual, weights);
    REQUIRE(r2);
    CHECK(rel_diff(1.0 - report.f_statistic, *r2) < 1e-9);
    CHECK(report.f_statistic >= 0.0);
    CHECK(report.f_statistic <= 1.0);
  }
}

TEST_CASE("affine changes of the success scale leave F unchanged") {
  const auto records = synthetic(9);
  std::uint64_t max_s = 0;
  for (const auto& r : records) max_s = std::max(max_s, r.retweets());
  const auto base = r2_perfect(records);
  const std::pair<long, long> maps[] = {{3, 7}, {1000, 0}, {1, 123456}, {-1, static_cast<long>(max_s)}};
  for (auto [a, b] : maps) {
    auto moved = records;
    for (auto& r : moved) r.size = static_cast<std::uint64_t>(a * static_cast<long>(r.retweets()) + b) + 1;
    const auto report = r2_perfect(moved);
    CHECK(rel_diff(report.f_statistic, base.f_statistic) < 1e-9);
    CHECK(rel_diff(report.r_squared, base.r_squared) < 1e-9);
  }
}

TEST_CASE("refining the partition never lowers R squared") {
  const auto records = synthetic(11);
  const KeyFn by_seed = [](const CascadeRecord& r) { return CellKey{0, r.seed_node}; };
  const KeyFn by_degree = [](const CascadeRecord& r) { return CellKey{0, r.seed_degree}; };
  const KeyFn finer = [](const CascadeRecord& r) {
    return CellKey{std::bit_cast<std::int64_t>(r.r0_true), 2 * std::int64_t(r.seed_node) + r.replicate % 2};
  };
  const double coarse = f_statistic(records, by_degree).r_squared;
  const double middle = f_statistic(records, by_seed).r_squared;
  const double perfect = r2_perfect(records).r_squared;
  const double fine = f_statistic(records, finer).r_squared;
  CHECK(middle >= coarse - 1e-9);
  CHECK(perfect >= middle - 1e-9);
  CHECK(fine >= perfect - 1e-9);
  for (double r2 : {coarse, middle, perfect, fine}) {
    CHECK(r2 >= 0.0);
    CHECK(r2 <= 1.0);
  }
}

TEST_CASE("noisy estimators reduce to the perfect one without noise") {
  const std::vector<double> grid{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  auto records = synthetic(13, grid);
  const auto perfect = r2_perfect(records);
  const auto binned = r2_noisy(records, 0.05);
  CHECK(binned.f_statistic == perfect.f_statistic);
  CHECK(r2_noisy(records, 1.0).r_squared <= perfect.r_squared);

  for (auto& r : records) r.weight = 1.0;
  const auto plugin = r2_noisy_plugin(records, grid);
  CHECK(rel_diff(plugin.r_squared, r2_perfect(records).r_squared) < 1e-9);
  CHECK(plugin.n_cells == 240);
  CHECK(plugin.min_cell_count == 30);
}

TEST_CASE("plug-in predictor interpolates between grid means") {
  const std::vector<double> grid{0.1, 0.2};
  std::vector<CascadeRecord> records{rec(0, 0.1, 2), rec(0, 0.1, 4), rec(0, 0.2, 10), rec(0, 0.2, 14)};
  // observed 0.15 for the first: prediction (3 + 12) / 2 = 7.5
  records[0].r0_observed = 0.15;
  records[3].r0_observed = 0.9;  // beyond the grid: held at 12
  const auto report = r2_noisy_plugin(records, grid);
  const std::vector<double> pred{7.5, 3.0, 12.0, 12.0};
  std::vector<double> actual{2, 4, 10, 14};
  const auto expected = r2_from_predictions(pred, actual, std::vector<double>(4, 1.0));
  CHECK(report.r_squared == doctest::Approx(*expected).epsilon(1e-12));
}

TEST_CASE("post-stratification weights") {
  const std::vector<double> grid{0.5, 1.0};
  ActivityTable table{{{1, 1.0}}};
  table.normalize();

  SUBCASE("targets equal to sampled frequencies") {
    std::vector<CascadeRecord> records{rec(0, 0.5, 1), rec(0, 0.5, 2)};
    poststratify(records, table, {0.5, 0.0}, grid);
    for (const auto& r : records) CHECK(r.weight == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uniform Beta puts 3/4 of the mass below the midpoint") {
    std::vector<CascadeRecord> records{rec(0, 0.5, 1), rec(0, 0.5, 2), rec(0, 1.0, 3), rec(0, 1.0, 4)};
    poststratify(records, table, {0.5, std::sqrt(1.0 / 12.0)}, grid);
    CHECK(records[0].weight == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(records[1].weight == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(records[2].weight == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("point mass") {
    std::vector<CascadeRecord> records{rec(0, 0.5, 1), rec(0, 1.0, 3), rec(0, 1.0, 4)};
    const auto report = poststratify(records, table, {0.5, 0.0}, grid);
    CHECK(records[0].weight == doctest::Approx(3.0));
    CHECK(records[1].weight == 0.0);
    CHECK(report.zero_weight_records == 2);
  }
  SUBCASE("missing target cells are reported") {
    std::vector<CascadeRecord> records{rec(0, 0.5, 1)};
    try {
      poststratify(records, table, {0.5, 0.2}, grid);
      FAIL("expected a coverage error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Coverage);
      CHECK(std::string(e.what()).find("R0 1") != std::string::npos);
    }
  }
}

TEST_CASE("post-stratified marginals match their targets") {
  const std::vector<double> grid{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  auto records = synthetic(17, grid);
  ActivityTable table;
  for (Degree d = 1; d <= 7; ++d) table.rows.push_back({d, 1.0 / d});
  table.normalize();
  const QualitySpec quality{0.15, 0.05};
  const auto report = poststratify(records, table, quality, grid);
  CHECK(report.warnings.empty());

  std::map<Degree, double> by_degree;
  std::vector<double> by_cell(grid.size(), 0.0);
  double total = 0.0;
  for (const auto& r : records) {
    by_degree[r.seed_degree] += r.weight;
    by_cell[grid_index(grid, r.r0_true)] += r.weight;
    total += r.weight;
  }
  CHECK(total == doctest::Approx(double(records.size())).epsilon(1e-12));
  for (const auto& row : table.rows) CHECK(std::abs(by_degree[row.degree] / total - row.weight) < 1e-9);
  const auto masses = grid_cell_masses(quality, grid);
  for (std::size_t c = 0; c < grid.size(); ++c) CHECK(std::abs(by_cell[c] / total - masses[c]) < 1e-9);
}

TEST_CASE("grid index picks the nearest point") {
  const std::vector<double> grid{0.1, 0.2, 0.3};
  CHECK(grid_index(grid, 0.0) == 0);
  CHECK(grid_index(grid, 0.14) == 0);
  CHECK(grid_index(grid, 0.16) == 1);
  CHECK(grid_index(grid, 0.3) == 2);
  CHECK(grid_index(grid, 5.0) == 2);
}
