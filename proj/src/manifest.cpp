#include "cascade_limits/manifest.hpp"

#include <charconv>
#include <fstream>
#include <functional>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

struct Entry {
  std::string value;
  std::size_t line;
};

[[noreturn]] void bad_value(const std::string& key, const Entry& e, const std::string& expected) {
  throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(e.line) + ": " + key + " must be " + expected +
                                            ", got '" + e.value + "'");
}

template <class T>
T parse_number(const std::string& key, const Entry& e) {
  T value{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [p, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || p != last) bad_value(key, e, "a number");
  return value;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = trim(rest.substr(0, comma));
    if (!item.empty()) {
      double value = 0.0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc{} || p != item.data() + item.size()) {
        throw Error(ErrorKind::InvalidConfig, "bad number '" + item + "' in list");
      }
      out.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

ActivityTable ExperimentManifest::load_table() const {
  if (activity_table == "default") return default_activity_table();
  if (!std::filesystem::exists(activity_table)) {
    throw Error(ErrorKind::InvalidConfig, "activity table not found: " + activity_table);
  }
  return load_activity_table(std::filesystem::path(activity_table));
}

ExperimentManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string text = trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = section + "." + trim(std::string_view(text).substr(0, eq));
    if (entries.contains(key)) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    entries[key] = {trim(std::string_view(text).substr(eq + 1)), line_no};
  }

  ExperimentManifest m;
  auto resolve = [&](const std::string& value) {
    std::filesystem::path p(value);
    return (p.is_absolute() ? p : base_dir / p).lexically_normal();
  };

  using Handler = std::function<void(const std::string&, const Entry&)>;
  const std::map<std::string, Handler> handlers = {
      {"graph.n_nodes", [&](auto& k, auto& e) { m.graph.n_nodes = parse_number<std::uint64_t>(k, e); }},
      {"graph.alpha", [&](auto& k, auto& e) { m.graph.alpha = parse_number<double>(k, e); }},
      {"graph.k_min", [&](auto& k, auto& e) { m.graph.k_min = parse_number<Degree>(k, e); }},
      {"graph.k_max",
       [&](auto& k, auto& e) {
         if (e.value == "sqrt") {
           // resolved once n_nodes is known
         } else if (e.value == "n") {
           m.graph.k_max = 0;
         } else {
           m.graph.k_max = parse_number<Degree>(k, e);
         }
       }},
      {"graph.seed", [&](auto& k, auto& e) { m.graph.rng_seed = parse_number<std::uint64_t>(k, e); }},
      {"graph.file", [&](auto&, auto& e) { m.graph_file = e.value; }},
      {"seeding.activity_table",
       [&](auto&, auto& e) { m.activity_table = e.value == "default" ? e.value : resolve(e.value).string(); }},
      {"seeding.n_seeds", [&](auto& k, auto& e) { m.sweep.n_seeds = parse_number<std::size_t>(k, e); }},
      {"sweep.r0_min", [&](auto& k, auto& e) { m.sweep.r0_min = parse_number<double>(k, e); }},
      {"sweep.r0_max", [&](auto& k, auto& e) { m.sweep.r0_max = parse_number<double>(k, e); }},
      {"sweep.r0_count", [&](auto& k, auto& e) { m.sweep.r0_count = parse_number<std::size_t>(k, e); }},
      {"sweep.replicates", [&](auto& k, auto& e) { m.sweep.replicates = parse_number<std::size_t>(k, e); }},
      {"sweep.q_mean", [&](auto& k, auto& e) { m.sweep.quality.q_mean = parse_number<double>(k, e); }},
      {"sweep.q_std", [&](auto& k, auto& e) { m.sweep.quality.q_std = parse_number<double>(k, e); }},
      {"sweep.sigma_n", [&](auto& k, auto& e) { m.sweep.noise.sigma_n = parse_number<double>(k, e); }},
      {"sweep.noise_mode",
       [&](auto& k, auto& e) {
         if (e.value == "per_cascade") {
           m.sweep.noise_mode = NoiseMode::PerCascade;
         } else if (e.value == "per_cell") {
           m.sweep.noise_mode = NoiseMode::PerCell;
         } else {
           bad_value(k, e, "per_cascade or per_cell");
         }
       }},
      {"sweep.bin_width", [&](auto& k, auto& e) { m.sweep.bin_width = parse_number<double>(k, e); }},
      {"sweep.seed", [&](auto& k, auto& e) { m.sweep.experiment_seed = parse_number<std::uint64_t>(k, e); }},
      {"sweep.records", [&](auto&, auto& e) { m.records_file = e.value; }},
      {"sweep.workers", [&](auto& k, auto& e) { m.workers = parse_number<unsigned>(k, e); }},
      {"sweep.cells_per_batch", [&](auto& k, auto& e) { m.cells_per_batch = parse_number<std::size_t>(k, e); }},
      {"analysis.r0_points",
       [&](auto&, auto& e) { m.analysis.r0_points = e.value == "grid" ? std::vector<double>{} : parse_real_list(e.value); }},
      {"analysis.sigma_q_ratios", [&](auto&, auto& e) { m.analysis.sigma_q_ratios = parse_real_list(e.value); }},
      {"analysis.sigma_n_ratios", [&](auto&, auto& e) { m.analysis.sigma_n_ratios = parse_real_list(e.value); }},
      {"analysis.sensitivity_r0", [&](auto& k, auto& e) { m.analysis.sensitivity_r0 = parse_number<double>(k, e); }},
      {"analysis.sensitivity_sigma_n_ratios",
       [&](auto&, auto& e) { m.analysis.sensitivity_sigma_n_ratios = parse_real_list(e.value); }},
      {"analysis.min_cell_count",
       [&](auto& k, auto& e) { m.analysis.min_cell_count = parse_number<std::size_t>(k, e); }},
      {"analysis.noisy_estimator",
       [&](auto& k, auto& e) {
         if (e.value == "plugin") {
           m.analysis.noisy_estimator = NoisyEstimator::Plugin;
         } else if (e.value == "binned") {
           m.analysis.noisy_estimator = NoisyEstimator::Binned;
         } else {
           bad_value(k, e, "plugin or binned");
         }
       }},
      {"analysis.noise_seed", [&](auto& k, auto& e) { m.analysis.noise_seed = parse_number<std::uint64_t>(k, e); }},
      {"output.dir", [&](auto&, auto& e) { m.output_dir = resolve(e.value); }},
  };

  bool sqrt_cutoff = false;
  for (const auto& [key, entry] : entries) {
    auto it = handlers.find(key);
    if (it == handlers.end()) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(entry.line) + ": unknown key " + key);
    }
    it->second(key, entry);
    if (key == "graph.k_max" && entry.value == "sqrt") sqrt_cutoff = true;
  }
  if (!entries.contains("output.dir")) m.output_dir = resolve("out");
  if (sqrt_cutoff) m.graph = with_structural_cutoff(m.graph);

  m.graph.validate();
  m.sweep.validate();
  for (double ratio : m.analysis.sigma_q_ratios) {
    if (!(ratio >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma_q ratios must be non-negative");
  }
  for (double ratio : m.analysis.sigma_n_ratios) {
    if (!(ratio >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma_n ratios must be non-negative");
  }
  for (double ratio : m.analysis.sensitivity_sigma_n_ratios) {
    if (!(ratio >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma_n ratios must be non-negative");
  }
  return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config " + path.string());
  return parse_manifest(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace cascade_limits
