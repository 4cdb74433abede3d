#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "xmotion/cli.hpp"
#include "xmotion/errors.hpp"

namespace {

// key=value pairs from --set flags, applied on top of the config file
void apply_overrides(xmotion::ExperimentConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw xmotion::ContractError("--set expects key=value, got '" + kv + "'");
    }
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

xmotion::ExperimentConfig build_config(const std::string& config_path,
                                       const std::vector<std::string>& sets) {
  xmotion::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = xmotion::ExperimentConfig::from_file(config_path);
  apply_overrides(cfg, sets);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-person motion forecasting toolkit"};
  app.require_subcommand(1);

  // synth
  xmotion::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic couple-motion dataset");
  synth_cmd->add_option("--out", synth.out_dir, "Output dataset directory")->required();
  synth_cmd->add_option("--scenario", synth.scenario,
                        "lagged-mirror|coupled-oscillator|orbit-lift");
  synth_cmd->add_option("--count", synth.count, "Total sequences to write");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--frames", synth.frames, "Frames per sequence");
  synth_cmd->add_option("--fps", synth.fps, "Frames per second");
  synth_cmd->add_option("--reps", synth.reps, "Repetitions per aerial and couple");

  // shared train/eval/predict options
  std::string config_path;
  std::vector<std::string> sets;
  std::string checkpoint_path;

  auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value experiment config file");
    cmd->add_option("--set", sets, "Override a config key (key=value, repeatable)");
  };

  auto* train_cmd = app.add_subcommand("train", "Train a variant on a dataset split");
  add_config_options(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_config_options(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();

  std::string predict_input, predict_output;
  double predict_fps = 25.0;
  int predict_horizon = 25;
  auto* predict_cmd = app.add_subcommand("predict", "Predict future frames for one sequence");
  add_config_options(predict_cmd);
  predict_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  predict_cmd->add_option("--input", predict_input, "Input sequence CSV")->required();
  predict_cmd->add_option("--output", predict_output, "Predicted sequence CSV")->required();
  predict_cmd->add_option("--fps", predict_fps, "Input sequence FPS");
  predict_cmd->add_option("--horizon", predict_horizon, "Frames to predict");

  std::string cameras_path, observations_path, triangulate_out;
  auto* tri_cmd = app.add_subcommand("triangulate", "Repair 3D points from two-view labels");
  tri_cmd->add_option("--cameras", cameras_path, "Camera calibration file")->required();
  tri_cmd->add_option("--observations", observations_path, "Pixel observation CSV")->required();
  tri_cmd->add_option("--out", triangulate_out, "Output CSV")->required();

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Pivot metric CSVs into per-figure tables");
  report_cmd->alias("plotdata");
  report_cmd->add_option("--out", report_out, "Output directory")->required();
  report_cmd->add_option("files", report_inputs, "Metric CSV files (one per variant)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) {
      xmotion::cmd_synth(synth);
    } else if (*train_cmd) {
      xmotion::cmd_train(build_config(config_path, sets));
    } else if (*eval_cmd) {
      xmotion::cmd_eval(build_config(config_path, sets), checkpoint_path);
    } else if (*predict_cmd) {
      xmotion::cmd_predict(build_config(config_path, sets), checkpoint_path, predict_input,
                           predict_fps, predict_horizon, predict_output);
    } else if (*tri_cmd) {
      xmotion::cmd_triangulate(cameras_path, observations_path, triangulate_out);
    } else if (*report_cmd) {
      xmotion::cmd_report(report_inputs, report_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xmotion::exit_code_for(e);
  }
  return 0;
}
