// Command-line front end: simulate observation logs, run the mapping
// pipeline, evaluate a finished map against the truth, and run the
// method-comparison benchmark.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rowmap/evaluation.hpp"
#include "rowmap/json_io.hpp"
#include "rowmap/pipeline.hpp"
#include "rowmap/simulator.hpp"

namespace {

/// CLI default: the noisy regime. Library defaults stay noise-free so tests
/// construct exact scenes; the tool is for exercising the full stack.
rowmap::SimSpec default_sim_spec() {
  rowmap::SimSpec spec;
  spec.noise = rowmap::NoiseSpec::realistic();
  spec.field.weed_outlier_rate = 0.1;
  spec.trajectory.wobble.lateral_amp = 0.01;
  spec.trajectory.wobble.yaw_amp = 0.02;
  return spec;
}

template <typename T>
T load_config(const std::string& path, T defaults) {
  if (!path.empty()) {
    rowmap::read_json_file(path).get_to(defaults);
  }
  return defaults;
}

int run_simulate(std::uint64_t seed, const std::string& config, const std::string& out,
                 const std::string& scene_out, bool with_timestamp) {
  const rowmap::SimSpec spec = load_config(config, default_sim_spec());
  const rowmap::ObservationLog log = rowmap::simulate(spec, seed);
  rowmap::write_log(log, out, with_timestamp);
  std::cout << "wrote " << log.frames.size() << " frames to " << out << "\n";
  if (!scene_out.empty()) {
    rowmap::write_scene(rowmap::SceneDocument{1, seed, log.scene}, scene_out, with_timestamp);
    std::cout << "wrote scene to " << scene_out << "\n";
  }
  return 0;
}

int run_run(const std::string& log_path, const std::string& config, const std::string& out,
            bool with_timestamp) {
  const rowmap::RunConfig run_config = load_config(config, rowmap::RunConfig{});
  const rowmap::ObservationLog log = rowmap::read_log(log_path);
  const rowmap::PipelineResult result = rowmap::run_pipeline(log, run_config);
  rowmap::RunDocument doc;
  doc.result = result;
  doc.config = run_config;
  doc.camera = log.specs.rig.side.intrinsics;
  doc.log_seed = log.seed;
  rowmap::write_run(doc, out, with_timestamp);
  std::cout << "mapped " << result.map.landmarks.size() << " landmarks from "
            << result.frames_with_plane << "/" << result.frames_total
            << " frames with a plane estimate; wrote " << out << "\n";
  return 0;
}

int run_evaluate(const std::string& map_path, const std::string& scene_path,
                 const std::string& out) {
  const rowmap::RunDocument doc = rowmap::read_run(map_path);
  const rowmap::SceneDocument scene = rowmap::read_scene(scene_path);
  if (doc.log_seed != scene.seed) {
    std::cerr << "warning: map came from log seed " << doc.log_seed << " but scene has seed "
              << scene.seed << "\n";
  }
  rowmap::MetricReport report;
  report.epsilon1_cm = rowmap::epsilon1_cm(doc.result.map, scene.scene, doc.result.poses,
                                           &report.matched, &report.unmatched);
  report.epsilon2_px =
      rowmap::epsilon2_px(doc.result.map, doc.result.tracks, doc.result.poses, doc.camera);
  const nlohmann::json j{{"epsilon1_cm", report.epsilon1_cm},
                         {"epsilon2_px", report.epsilon2_px},
                         {"matched", report.matched},
                         {"unmatched", report.unmatched}};
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) rowmap::write_text_file(out, j.dump(2) + "\n");
  return 0;
}

int run_benchmark(const std::string& log_path, const std::string& out) {
  const rowmap::ObservationLog log = rowmap::read_log(log_path);
  const std::vector<rowmap::BenchmarkRow> rows =
      rowmap::run_benchmark(log, rowmap::default_method_table());
  const std::string csv = rowmap::benchmark_csv(rows);
  std::cout << csv;
  if (!out.empty()) rowmap::write_text_file(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corn-row mapping: simulate, map, evaluate, benchmark"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config_path;
  std::string out_path;
  std::string scene_out;
  std::string log_path;
  std::string map_path;
  std::string scene_path;
  bool no_timestamp = false;
  bool print_default = false;

  CLI::App* simulate = app.add_subcommand("simulate", "generate an observation log");
  simulate->add_option("--seed", seed, "simulation seed");
  simulate->add_option("--config", config_path, "JSON overriding the default spec");
  simulate->add_option("--out", out_path, "output log (JSONL)");
  simulate->add_option("--scene-out", scene_out, "also write the ground-truth scene");
  simulate->add_flag("--no-timestamp", no_timestamp, "omit generated_at for byte-stable output");
  simulate->add_flag("--print-default-config", print_default, "print the default spec and exit");

  CLI::App* run = app.add_subcommand("run", "run the mapping pipeline on a log");
  run->add_option("--log", log_path, "input log (JSONL)");
  run->add_option("--config", config_path, "JSON overriding the default run config");
  run->add_option("--out", out_path, "output map (JSON)");
  run->add_flag("--no-timestamp", no_timestamp, "omit generated_at for byte-stable output");
  run->add_flag("--print-default-config", print_default, "print the default config and exit");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a map against a scene");
  evaluate->add_option("--map", map_path, "map produced by 'run'")->required();
  evaluate->add_option("--scene", scene_path, "scene produced by 'simulate'")->required();
  evaluate->add_option("--out", out_path, "also write the metrics JSON here");

  CLI::App* benchmark = app.add_subcommand("benchmark", "compare all methods on one log");
  benchmark->add_option("--log", log_path, "input log (JSONL)")->required();
  benchmark->add_option("--out", out_path, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (print_default) {
        std::cout << nlohmann::json(default_sim_spec()).dump(2) << "\n";
        return 0;
      }
      if (out_path.empty()) {
        std::cerr << "error: simulate needs --out\n";
        return 1;
      }
      return run_simulate(seed, config_path, out_path, scene_out, !no_timestamp);
    }
    if (run->parsed()) {
      if (print_default) {
        std::cout << nlohmann::json(rowmap::RunConfig{}).dump(2) << "\n";
        return 0;
      }
      if (log_path.empty() || out_path.empty()) {
        std::cerr << "error: run needs --log and --out\n";
        return 1;
      }
      return run_run(log_path, config_path, out_path, !no_timestamp);
    }
    if (evaluate->parsed()) {
      return run_evaluate(map_path, scene_path, out_path);
    }
    if (benchmark->parsed()) {
      return run_benchmark(log_path, out_path);
    }
  } catch (const rowmap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
