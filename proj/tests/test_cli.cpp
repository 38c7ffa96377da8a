#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string output;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "cascade_limits_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args) {
  const auto log = workdir() / "last.log";
  const std::string cmd = std::string("\"") + CASCADE_LIMITS_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_manifest(const std::string& name, const std::string& text) {
  const auto path = workdir() / name;
  std::ofstream(path) << text;
  return path;
}

const char* kSmall = R"([graph]
n_nodes = 4000
alpha = 2.05
seed = 3

[seeding]
n_seeds = 6

[sweep]
r0_min = 0.1
r0_max = 0.3
r0_count = 3
replicates = 20
seed = 5

[analysis]
sigma_q_ratios = 0, 0.15
sigma_n_ratios = 0, 0.2
sensitivity_r0 = 0.2
)";

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("gen-graph").code == 1);
  CHECK(cli("gen-graph --config /nonexistent/manifest.ini").code == 1);
}

TEST_CASE("config errors exit with 2") {
  auto run = cli("gen-graph --config " + write_manifest("alpha.ini", "[graph]\nalpha = 0.9\n").string());
  CHECK(run.code == 2);
  CHECK(run.output.find("alpha must exceed 1") != std::string::npos);

  run = cli("gen-graph --config " + write_manifest("unknown.ini", "[graph]\nbeta = 2\n").string());
  CHECK(run.code == 2);
  CHECK(run.output.find("unknown key graph.beta") != std::string::npos);

  const auto manifest = write_manifest("nograph.ini", std::string(kSmall) + "[output]\ndir = nograph_out\n");
  run = cli("sweep --config " + manifest.string());
  CHECK(run.code == 2);
  CHECK(run.output.find((workdir() / "nograph_out" / "graph.bin").string()) != std::string::npos);
}

TEST_CASE("full pipeline") {
  const auto manifest = write_manifest("small.ini", kSmall);
  const auto out = workdir() / "out";

  auto run = cli("gen-graph --config " + manifest.string());
  REQUIRE(run.code == 0);
  const auto summary = slurp(out / "graph.bin.summary.txt");
  CHECK(summary.find("n_nodes=4000") != std::string::npos);
  CHECK(summary.find("n_edges=") != std::string::npos);
  CHECK(summary.find("mean_degree=") != std::string::npos);

  run = cli("sweep --config " + manifest.string());
  REQUIRE(run.code == 0);
  const auto records = slurp(out / "records.csv");
  CHECK(line_count(records) == 1 + 6 * 3 * 20);
  CHECK(run.output.find("record_count=360") != std::string::npos);

  run = cli("sweep --workers 3 --config " + manifest.string());
  REQUIRE(run.code == 0);
  CHECK(slurp(out / "records.csv") == records);

  run = cli("estimate --config " + manifest.string());
  REQUIRE(run.code == 0);
  const auto estimates = slurp(out / "estimates.csv");
  CHECK(estimates.starts_with(
      "r0,sigma_q,sigma_n,r_squared,f_statistic,total_var,cond_var,n_cells,min_cell_count,undefined\n"));
  CHECK(line_count(estimates) == 1 + 3 * 2 * 2);

  run = cli("sensitivity --config " + manifest.string());
  REQUIRE(run.code == 0);
  CHECK(line_count(slurp(out / "sensitivity.csv")) == 1 + 4);

  run = cli("sweep --seed 6 --out " + (workdir() / "reseeded").string() + " --config " + manifest.string());
  CHECK(run.code == 2);  // no graph in the new output directory yet
  run = cli("all --seed 6 --out " + (workdir() / "reseeded").string() + " --config " + manifest.string());
  REQUIRE(run.code == 0);
  CHECK(slurp(workdir() / "reseeded" / "records.csv") != records);
}

TEST_CASE("zero-variance records give an undefined estimate") {
  const auto manifest = write_manifest("flat.ini", R"([graph]
n_nodes = 2000

[seeding]
n_seeds = 3

[sweep]
r0_min = 0
r0_max = 0
r0_count = 1
replicates = 5

[output]
dir = flat_out
)");
  const auto run = cli("all --config " + manifest.string());
  REQUIRE(run.code == 0);
  const auto estimates = slurp(workdir() / "flat_out" / "estimates.csv");
  CHECK(estimates.find("\n0,0,0,nan,nan,0,0,") != std::string::npos);
  CHECK(estimates.ends_with(",1\n"));
}
