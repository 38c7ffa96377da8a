#include "cascade_limits/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cascade_limits/cascade.hpp"
#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

std::filesystem::path parts_dir(const std::filesystem::path& records_path) {
  return std::filesystem::path(records_path).concat(".parts");
}

std::filesystem::path part_path(const std::filesystem::path& dir, std::size_t batch) {
  char name[32];
  std::snprintf(name, sizeof name, "part-%08zu.csv", batch);
  return dir / name;
}

template <class T>
T parse_field(std::string_view text, std::size_t line, const char* column) {
  T value{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw Error(ErrorKind::Parse, "records line " + std::to_string(line) + ": bad " + column + " '" +
                                      std::string(text) + "'");
  }
  return value;
}

}  // namespace

void SweepConfig::validate() const {
  if (n_seeds < 1) invalid("n_seeds must be at least 1");
  if (!(r0_min >= 0.0 && r0_min <= 1.0 && r0_max >= 0.0 && r0_max <= 1.0)) invalid("R0 range must lie in [0, 1]");
  if (r0_min > r0_max) invalid("r0_min must not exceed r0_max");
  if (r0_count < 1) invalid("r0_count must be at least 1");
  if (replicates < 1) invalid("replicates must be at least 1");
  if (!(bin_width >= 0.0)) invalid("bin_width must be non-negative");
  quality.validate();
  noise.validate();
}

std::vector<double> SweepConfig::r0_grid() const {
  std::vector<double> grid(r0_count);
  if (r0_count == 1) {
    grid[0] = round_real(r0_min);
    return grid;
  }
  const double step = (r0_max - r0_min) / static_cast<double>(r0_count - 1);
  for (std::size_t i = 0; i < r0_count; ++i) {
    grid[i] = round_real(i + 1 == r0_count ? r0_max : r0_min + static_cast<double>(i) * step);
  }
  return grid;
}

double SweepConfig::resolved_bin_width() const {
  if (bin_width > 0.0) return bin_width;
  if (r0_count > 1 && r0_max > r0_min) return (r0_max - r0_min) / static_cast<double>(r0_count - 1);
  return 1.0;
}

SweepSummary run_sweep(const Graph& graph, const ActivityTable& table, const SweepConfig& config,
                       const SweepOptions& options, const BatchSink& sink) {
  config.validate();
  const std::vector<double> grid = config.r0_grid();
  SweepSummary summary;
  summary.mean_degree = mean_degree(graph);
  std::vector<double> probability(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    probability[i] = edge_probability(grid[i], summary.mean_degree);
  }
  summary.p_max = *std::max_element(probability.begin(), probability.end());

  const DegreeIndex index(graph);
  summary.seeds = select_seeds(graph, index, table, config.n_seeds, config.experiment_seed);
  const std::size_t cells = config.n_seeds * config.r0_count;
  const std::size_t per_batch = std::max<std::size_t>(1, options.cells_per_batch);
  summary.batches = (cells + per_batch - 1) / per_batch;
  summary.records = config.record_count();

  std::atomic<std::size_t> next_batch{0};
  std::atomic<std::uint64_t> clamped{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      CascadeEngine engine(graph);
      for (;;) {
        if (failed.load()) return;
        const std::size_t batch = next_batch.fetch_add(1);
        if (batch >= summary.batches) return;
        const std::size_t first = batch * per_batch;
        const std::size_t last = std::min(cells, first + per_batch);
        std::vector<CascadeRecord> records;
        records.reserve((last - first) * config.replicates);
        std::uint64_t batch_clamped = 0;
        for (std::size_t cell = first; cell < last; ++cell) {
          const std::size_t seed_index = cell / config.r0_count;
          const std::size_t r0_index = cell % config.r0_count;
          const Seed& seed = summary.seeds[seed_index];
          const double r0 = grid[r0_index];
          double cell_observation = r0;
          if (config.noise_mode == NoiseMode::PerCell) {
            CounterStream cell_stream = derive_stream(config.experiment_seed, seed_index, r0_index, kNoIndex);
            cell_observation = round_real(observe_r0(r0, config.noise, cell_stream));
          }
          for (std::size_t rep = 0; rep < config.replicates; ++rep) {
            CounterStream stream = derive_stream(config.experiment_seed, seed_index, r0_index, rep);
            const CascadeOutcome outcome = engine.run(seed.node, probability[r0_index], stream);
            CascadeRecord record;
            record.seed_node = seed.node;
            record.seed_degree = seed.degree;
            record.r0_true = r0;
            record.r0_observed = config.noise_mode == NoiseMode::PerCell
                                     ? cell_observation
                                     : round_real(observe_r0(r0, config.noise, stream));
            record.replicate = static_cast<std::uint32_t>(rep);
            record.size = outcome.size;
            record.rounds = outcome.rounds;
            record.weight = 1.0;
            if (config.noise.sigma_n > 0.0 && (record.r0_observed == 0.0 || record.r0_observed == 1.0)) {
              ++batch_clamped;
            }
            records.push_back(record);
          }
        }
        clamped += batch_clamped;
        sink(batch, std::move(records));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      failed = true;
    }
  };

  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  summary.clamped_observations = clamped.load();
  return summary;
}

std::vector<CascadeRecord> run_sweep(const Graph& graph, const ActivityTable& table,
                                     const SweepConfig& config, const SweepOptions& options,
                                     SweepSummary* summary) {
  std::vector<std::vector<CascadeRecord>> batches;
  std::mutex mutex;
  auto sink = [&](std::size_t index, std::vector<CascadeRecord>&& batch) {
    std::lock_guard lock(mutex);
    if (batches.size() <= index) batches.resize(index + 1);
    batches[index] = std::move(batch);
  };
  SweepSummary result = run_sweep(graph, table, config, options, sink);
  std::vector<CascadeRecord> records;
  records.reserve(result.records);
  for (auto& batch : batches) records.insert(records.end(), batch.begin(), batch.end());
  if (summary) *summary = std::move(result);
  return records;
}

SweepSummary run_sweep_to_csv(const Graph& graph, const ActivityTable& table, const SweepConfig& config,
                              const SweepOptions& options, const std::filesystem::path& records_path) {
  const auto dir = parts_dir(records_path);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto sink = [&](std::size_t index, std::vector<CascadeRecord>&& batch) {
    const auto path = part_path(dir, index);
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
      for (const auto& record : batch) write_record_row(out, record);
      if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  };
  SweepSummary summary = run_sweep(graph, table, config, options, sink);

  const auto tmp = std::filesystem::path(records_path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << kRecordHeader << '\n';
    for (std::size_t b = 0; b < summary.batches; ++b) {
      std::ifstream part(part_path(dir, b), std::ios::binary);
      if (!part) throw Error(ErrorKind::Io, "missing batch file " + part_path(dir, b).string());
      out << part.rdbuf();
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, records_path);
  std::filesystem::remove_all(dir);
  return summary;
}

std::string format_real(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
  return std::string(buf, p);
}

double round_real(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
  double out = 0.0;
  std::from_chars(buf, p, out);
  return out;
}

void write_record_row(std::ostream& out, const CascadeRecord& r) {
  out << r.seed_node << ',' << r.seed_degree << ',' << format_real(r.r0_true) << ','
      << format_real(r.r0_observed) << ',' << r.replicate << ',' << r.size << ',' << r.retweets() << ','
      << r.rounds << ',' << format_real(r.weight) << '\n';
}

void write_records_csv(const std::vector<CascadeRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << kRecordHeader << '\n';
  for (const auto& r : records) write_record_row(out, r);
}

std::vector<CascadeRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open records file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) {
    throw Error(ErrorKind::Parse, "records file " + path.string() + " lacks the expected header");
  }
  std::vector<CascadeRecord> records;
  std::size_t line_no = 1;
  std::string_view fields[9];
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view rest(line);
    std::size_t n = 0;
    while (n < 9) {
      const auto comma = rest.find(',');
      fields[n++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (n != 9 || rest.find(',') != std::string_view::npos) {
      throw Error(ErrorKind::Parse, "records line " + std::to_string(line_no) + ": expected 9 columns");
    }
    CascadeRecord r;
    r.seed_node = parse_field<NodeId>(fields[0], line_no, "seed_node");
    r.seed_degree = parse_field<Degree>(fields[1], line_no, "seed_degree");
    r.r0_true = parse_field<double>(fields[2], line_no, "r0_true");
    r.r0_observed = parse_field<double>(fields[3], line_no, "r0_observed");
    r.replicate = parse_field<std::uint32_t>(fields[4], line_no, "replicate");
    r.size = parse_field<std::uint64_t>(fields[5], line_no, "size");
    const auto retweets = parse_field<std::uint64_t>(fields[6], line_no, "retweets");
    r.rounds = parse_field<std::uint64_t>(fields[7], line_no, "rounds");
    r.weight = parse_field<double>(fields[8], line_no, "weight");
    if (r.size < 1 || retweets != r.size - 1) {
      throw Error(ErrorKind::Parse, "records line " + std::to_string(line_no) + ": retweets must equal size - 1");
    }
    records.push_back(r);
  }
  return records;
}

std::uint64_t reobserve(std::span<CascadeRecord> records, const NoiseSpec& noise, NoiseMode mode,
                        std::uint64_t noise_seed, std::uint64_t slot) {
  noise.validate();
  std::uint64_t clamped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    CounterStream stream = mode == NoiseMode::PerCascade
                               ? derive_stream(noise_seed, slot, i, kNoIndex)
                               : derive_stream(noise_seed, slot, r.seed_node, std::bit_cast<std::uint64_t>(r.r0_true));
    r.r0_observed = round_real(observe_r0(r.r0_true, noise, stream));
    if (noise.sigma_n > 0.0 && (r.r0_observed == 0.0 || r.r0_observed == 1.0)) ++clamped;
  }
  return clamped;
}

}  // namespace cascade_limits
