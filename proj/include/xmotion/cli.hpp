#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmotion/model.hpp"

namespace xmotion {

// Experiment configuration, read from a plain-text key=value file ('#'
// starts a comment). Unknown keys are rejected; command-line flags override
// file values via apply_override.
struct ExperimentConfig {
  std::string data_dir;
  std::string out_dir = "out";
  std::string split = "ca";
  std::string sa_aerial;
  std::string variant = "xia";
  std::uint64_t seed = 0;
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 1e-3;
  int sample_stride = 5;
  int in_len = 50;
  int step_len = 10;
  int window_len = 10;
  int dct_coeffs = 0;  // 0 keeps all M+T coefficients
  int d_model = 64;
  int gcn_layers = 4;
  int gcn_hidden = 64;
  int heads_key = 8;
  int heads_value = 1;
  int test_subsequences = 64;
  int eval_horizon = 25;
  bool per_joint = false;

  static ExperimentConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  ModelConfig model_config(int joints) const;
};

struct SynthOptions {
  std::string out_dir;
  std::string scenario = "lagged-mirror";
  int count = 12;  // total sequences written
  std::uint64_t seed = 0;
  int frames = 150;
  double fps = 25.0;
  int reps = 2;  // repetitions per (aerial, couple)
};

// Command bodies; they throw (see errors.hpp) and leave exit-code mapping to
// the binary: 0 success, 2 usage, 3 data, 4 numeric/training failure.
void cmd_synth(const SynthOptions& opts);
void cmd_train(const ExperimentConfig& cfg);
void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path);
void cmd_predict(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& input_csv, double fps, int horizon,
                 const std::string& out_csv);
void cmd_triangulate(const std::string& cameras_path, const std::string& observations_path,
                     const std::string& out_csv);
void cmd_report(const std::vector<std::string>& metrics_csvs, const std::string& out_dir);

int exit_code_for(const std::exception& error);

}  // namespace xmotion
