#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rowmap/simulator.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "rowmap_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

CommandResult run_cli(const std::string& args) {
  const fs::path dir = work_dir();
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  const std::string command = std::string(ROWMAP_CLI_PATH) + " " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int raw = std::system(command.c_str());
  CommandResult result;
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

// A small scene keeps the suite fast; merge semantics layer it on the
// tool's default spec.
fs::path small_config() {
  const fs::path path = work_dir() / "small_config.json";
  std::ofstream out(path);
  out << R"({"field": {"stalk_count": 8}, "trajectory": {"length": 0.8}})";
  return path;
}

}  // namespace

TEST_CASE("cli prints parseable default configs") {
  const CommandResult sim = run_cli("simulate --print-default-config");
  CHECK(sim.status == 0);
  const json sim_spec = json::parse(sim.out);
  CHECK(sim_spec.at("field").at("stalk_count").get<int>() == 40);
  CHECK(sim_spec.at("noise").at("pixel_sigma").get<double>() == 1.0);
  CHECK(sim_spec.at("trajectory").at("speed").get<double>() == 0.3);

  const CommandResult run = run_cli("run --print-default-config");
  CHECK(run.status == 0);
  const json run_config = json::parse(run.out);
  CHECK(run_config.at("plane_source").get<std::string>() == "sfm_distance");
  CHECK(run_config.at("tracker").get<std::string>() == "box");
  CHECK(run_config.at("odometry").get<std::string>() == "base");
}

TEST_CASE("cli simulate writes a loadable log and scene") {
  const fs::path dir = work_dir();
  const fs::path log_path = dir / "sim.jsonl";
  const fs::path scene_path = dir / "sim_scene.json";
  const CommandResult result =
      run_cli("simulate --seed 3 --config " + small_config().string() + " --out " +
              log_path.string() + " --scene-out " + scene_path.string() + " --no-timestamp");
  REQUIRE(result.status == 0);
  CHECK(result.out.find("wrote") != std::string::npos);

  const rowmap::ObservationLog log = rowmap::read_log(log_path.string());
  CHECK(log.seed == 3);
  CHECK(log.scene.stalk_positions.size() == 8);
  CHECK(log.frames.size() == 80);  // 0.8 m at 0.3 m/s, 30 fps

  const json scene = json::parse(slurp(scene_path));
  CHECK(scene.at("seed").get<std::uint64_t>() == 3);
  CHECK(scene.at("scene").at("stalks").size() == 8);
}

TEST_CASE("cli outputs are byte-stable with --no-timestamp") {
  const fs::path dir = work_dir();
  const std::string config = small_config().string();
  const fs::path log_a = dir / "stable_a.jsonl";
  const fs::path log_b = dir / "stable_b.jsonl";
  REQUIRE(run_cli("simulate --seed 11 --config " + config + " --out " + log_a.string() +
                  " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("simulate --seed 11 --config " + config + " --out " + log_b.string() +
                  " --no-timestamp")
              .status == 0);
  CHECK(slurp(log_a) == slurp(log_b));

  const fs::path map_a = dir / "stable_map_a.json";
  const fs::path map_b = dir / "stable_map_b.json";
  REQUIRE(run_cli("run --log " + log_a.string() + " --out " + map_a.string() +
                  " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("run --log " + log_b.string() + " --out " + map_b.string() +
                  " --no-timestamp")
              .status == 0);
  const std::string map_bytes = slurp(map_a);
  CHECK(!map_bytes.empty());
  CHECK(map_bytes == slurp(map_b));

  // A different seed must actually change the output.
  const fs::path log_c = dir / "stable_c.jsonl";
  REQUIRE(run_cli("simulate --seed 12 --config " + config + " --out " + log_c.string() +
                  " --no-timestamp")
              .status == 0);
  CHECK(slurp(log_a) != slurp(log_c));
}

TEST_CASE("cli run plus evaluate yields finite metrics") {
  const fs::path dir = work_dir();
  const std::string config = small_config().string();
  const fs::path log_path = dir / "eval.jsonl";
  const fs::path scene_path = dir / "eval_scene.json";
  const fs::path map_path = dir / "eval_map.json";
  const fs::path metrics_path = dir / "eval_metrics.json";
  REQUIRE(run_cli("simulate --seed 21 --config " + config + " --out " + log_path.string() +
                  " --scene-out " + scene_path.string() + " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("run --log " + log_path.string() + " --out " + map_path.string() +
                  " --no-timestamp")
              .status == 0);
  const CommandResult result = run_cli("evaluate --map " + map_path.string() + " --scene " +
                                       scene_path.string() + " --out " + metrics_path.string());
  REQUIRE(result.status == 0);
  CHECK(result.err.empty());  // seeds agree, no warning
  const json metrics = json::parse(slurp(metrics_path));
  CHECK(metrics.at("epsilon1_cm").get<double>() >= 0.0);
  CHECK(metrics.at("epsilon1_cm").get<double>() < 10.0);
  CHECK(metrics.at("epsilon2_px").get<double>() >= 0.0);
  CHECK(metrics.at("matched").get<int>() >= 2);
}

TEST_CASE("cli evaluate warns when map and scene seeds differ") {
  const fs::path dir = work_dir();
  const std::string config = small_config().string();
  const fs::path log_path = dir / "warn.jsonl";
  const fs::path scene_path = dir / "warn_scene.json";
  const fs::path other_scene = dir / "warn_scene_other.json";
  const fs::path map_path = dir / "warn_map.json";
  REQUIRE(run_cli("simulate --seed 31 --config " + config + " --out " + log_path.string() +
                  " --scene-out " + scene_path.string() + " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("simulate --seed 32 --config " + config + " --out " + log_path.string() +
                  " --scene-out " + other_scene.string() + " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("simulate --seed 31 --config " + config + " --out " + log_path.string() +
                  " --no-timestamp")
              .status == 0);
  REQUIRE(run_cli("run --log " + log_path.string() + " --out " + map_path.string() +
                  " --no-timestamp")
              .status == 0);
  const CommandResult result =
      run_cli("evaluate --map " + map_path.string() + " --scene " + other_scene.string());
  CHECK(result.status == 0);
  CHECK(result.err.find("warning") != std::string::npos);
}

TEST_CASE("cli benchmark writes the method table") {
  const fs::path dir = work_dir();
  const fs::path log_path = dir / "bench.jsonl";
  const fs::path csv_path = dir / "bench.csv";
  REQUIRE(run_cli("simulate --seed 41 --config " + small_config().string() + " --out " +
                  log_path.string() + " --no-timestamp")
              .status == 0);
  const CommandResult result =
      run_cli("benchmark --log " + log_path.string() + " --out " + csv_path.string());
  REQUIRE(result.status == 0);
  const std::string csv = slurp(csv_path);
  CHECK(csv.rfind("method,epsilon1_cm,epsilon2_px,matched,unmatched\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + six methods
  CHECK(csv.find("our_approach,") != std::string::npos);
  CHECK(csv.find("optical_flow_tracking,") != std::string::npos);
  CHECK(result.out == csv);  // the table is also printed
}

TEST_CASE("cli errors carry the offending path and a nonzero exit") {
  const CommandResult no_out = run_cli("simulate");
  CHECK(no_out.status == 1);
  CHECK(no_out.err.find("--out") != std::string::npos);

  const fs::path missing = work_dir() / "does_not_exist.jsonl";
  const CommandResult bad_log =
      run_cli("run --log " + missing.string() + " --out " + (work_dir() / "x.json").string());
  CHECK(bad_log.status == 1);
  CHECK(bad_log.err.find("error:") != std::string::npos);
  CHECK(bad_log.err.find(missing.string()) != std::string::npos);

  CHECK(run_cli("evaluate").status != 0);   // required options missing
  CHECK(run_cli("nonsense").status != 0);   // unknown subcommand
  CHECK(run_cli("").status != 0);           // a subcommand is required
}
