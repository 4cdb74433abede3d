#include "xmotion/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "xmotion/checkpoint.hpp"
#include "xmotion/data.hpp"
#include "xmotion/rng.hpp"
#include "xmotion/train.hpp"

namespace xmotion {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

long to_long(const std::string& value, const std::string& key) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ContractError("config key '" + key + "' needs an integer, got '" + value + "'");
  }
}

double to_double(const std::string& value, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ContractError("config key '" + key + "' needs a number, got '" + value + "'");
  }
}

bool to_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ContractError("config key '" + key + "' needs true/false, got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "data_dir") {
    data_dir = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "split") {
    split = value;
  } else if (key == "sa_aerial") {
    sa_aerial = value;
  } else if (key == "variant") {
    variant = value;
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_long(value, key));
  } else if (key == "epochs") {
    epochs = static_cast<int>(to_long(value, key));
  } else if (key == "batch_size") {
    batch_size = static_cast<int>(to_long(value, key));
  } else if (key == "learning_rate") {
    learning_rate = to_double(value, key);
  } else if (key == "sample_stride") {
    sample_stride = static_cast<int>(to_long(value, key));
  } else if (key == "in_len") {
    in_len = static_cast<int>(to_long(value, key));
  } else if (key == "step_len") {
    step_len = static_cast<int>(to_long(value, key));
  } else if (key == "window_len") {
    window_len = static_cast<int>(to_long(value, key));
  } else if (key == "dct_coeffs") {
    dct_coeffs = static_cast<int>(to_long(value, key));
  } else if (key == "d_model") {
    d_model = static_cast<int>(to_long(value, key));
  } else if (key == "gcn_layers") {
    gcn_layers = static_cast<int>(to_long(value, key));
  } else if (key == "gcn_hidden") {
    gcn_hidden = static_cast<int>(to_long(value, key));
  } else if (key == "heads_key") {
    heads_key = static_cast<int>(to_long(value, key));
  } else if (key == "heads_value") {
    heads_value = static_cast<int>(to_long(value, key));
  } else if (key == "test_subsequences") {
    test_subsequences = static_cast<int>(to_long(value, key));
  } else if (key == "eval_horizon") {
    eval_horizon = static_cast<int>(to_long(value, key));
  } else if (key == "per_joint") {
    per_joint = to_bool(value, key);
  } else {
    throw ContractError("unknown config key: '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value in config", line_no);
    }
    cfg.apply_override(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  return cfg;
}

ModelConfig ExperimentConfig::model_config(int joints) const {
  ModelConfig mc;
  mc.joints = joints;
  mc.window = window_len;
  mc.step = step_len;
  mc.dct_coeffs = dct_coeffs;
  mc.d_model = d_model;
  mc.gcn_layers = gcn_layers;
  mc.gcn_hidden = gcn_hidden;
  mc.heads_key = heads_key;
  mc.heads_value = heads_value;
  mc.validate();
  return mc;
}

void cmd_synth(const SynthOptions& opts) {
  if (opts.count < 0 || opts.reps < 1 || opts.frames < 1) {
    throw ContractError("synth: count >= 0, reps >= 1 and frames >= 1 required");
  }
  const Scenario scenario = scenario_from_string(opts.scenario);

  std::vector<CoupleSequence> sequences;
  for (int i = 0; i < opts.count; ++i) {
    const int couple = 1 + (i % 2);
    const int pair_index = i / 2;
    const int variation = pair_index / opts.reps;
    const int rep = pair_index % opts.reps;

    SynthConfig synth;
    synth.scenario = scenario;
    synth.frames = opts.frames;
    synth.fps = opts.fps;
    CoupleSequence seq = synthesize_couple(
        mix_seed(mix_seed(opts.seed, static_cast<std::uint64_t>(variation) * 100 +
                                         static_cast<std::uint64_t>(rep)),
                 static_cast<std::uint64_t>(couple)),
        synth);
    seq.aerial = opts.scenario + "-" + std::to_string(variation);
    seq.couple = couple;
    seq.repetition = rep;
    seq.seq_id = seq.aerial + "-c" + std::to_string(couple) + "-r" + std::to_string(rep);
    sequences.push_back(std::move(seq));
  }
  save_dataset(opts.out_dir, sequences);
}

namespace {

struct LoadedSplit {
  DatasetSplit split;
  int joints = 0;
};

LoadedSplit load_and_split(const ExperimentConfig& cfg) {
  if (cfg.data_dir.empty()) throw ContractError("no data_dir configured");
  LoadedSplit out;
  const std::vector<CoupleSequence> dataset = load_sequences(cfg.data_dir);
  if (dataset.empty()) throw ParseError("dataset at " + cfg.data_dir + " holds no sequences");
  out.split = make_split(dataset, split_from_string(cfg.split, cfg.sa_aerial));
  out.joints = dataset.front().leader.joint_count();
  return out;
}

CollabModel load_model(const ExperimentConfig& cfg, int joints,
                       const std::string& checkpoint_path) {
  CollabModel model =
      make_variant(variant_from_string(cfg.variant), cfg.model_config(joints), cfg.seed);
  const NamedTensors stored = load_checkpoint(checkpoint_path);
  ParamRefs refs;
  model.collect("", refs);
  if (stored.size() != refs.size()) {
    throw ParseError("checkpoint incompatible: holds " + std::to_string(stored.size()) +
                     " tensors, model needs " + std::to_string(refs.size()));
  }
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, tensor] : stored) by_name[name] = &tensor;
  for (auto& [name, slot] : refs) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("checkpoint incompatible: missing " + name);
    if (it->second->shape() != slot->shape()) {
      throw ParseError("checkpoint incompatible: shape mismatch for " + name);
    }
    *slot = *it->second;
  }
  return model;
}

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.seed = cfg.seed;
  tc.in_len = cfg.in_len;
  tc.sample_stride = cfg.sample_stride;
  return tc;
}

EvalConfig eval_config(const ExperimentConfig& cfg) {
  EvalConfig ec;
  ec.in_len = cfg.in_len;
  ec.horizon = cfg.eval_horizon;
  ec.subsequences = cfg.test_subsequences;
  ec.per_joint = cfg.per_joint;
  return ec;
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg) {
  const LoadedSplit data = load_and_split(cfg);
  if (data.split.train.empty()) throw ContractError("split produced an empty training set");

  CollabModel model =
      make_variant(variant_from_string(cfg.variant), cfg.model_config(data.joints), cfg.seed);
  const TrainResult result = train(model, data.split.train, train_config(cfg), Skeleton::mocap18());

  std::filesystem::create_directories(cfg.out_dir);
  ParamRefs refs;
  model.collect("", refs);
  NamedTensors snapshot;
  snapshot.reserve(refs.size());
  for (auto& [name, tensor] : refs) snapshot.emplace_back(name, *tensor);
  save_checkpoint(cfg.out_dir + "/checkpoint.ckpt", snapshot);
  save_loss_curve(cfg.out_dir + "/loss_curve.csv", result.curve);
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  const LoadedSplit data = load_and_split(cfg);
  if (data.split.test.empty()) throw ContractError("split produced an empty test set");
  const CollabModel model = load_model(cfg, data.joints, checkpoint_path);

  const MetricsReport report =
      evaluate(model, data.split.test, Skeleton::mocap18(), eval_config(cfg));

  std::filesystem::create_directories(cfg.out_dir);
  report.save_csv(cfg.out_dir + "/metrics.csv");
  const std::string table = report.to_table();
  {
    std::ofstream out(cfg.out_dir + "/metrics_table.txt", std::ios::trunc);
    if (!out) throw IoError("cannot write " + cfg.out_dir + "/metrics_table.txt");
    out << table;
  }
  std::cout << table;
}

void cmd_predict(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& input_csv, double fps, int horizon,
                 const std::string& out_csv) {
  if (horizon < 1) throw ContractError("predict: horizon must be >= 1");
  CoupleSequence input = load_sequence_csv(input_csv, fps);
  if (input.frame_count() < cfg.in_len) {
    throw InsufficientHistoryError("predict: input shorter than in_len");
  }
  const CollabModel model = load_model(cfg, input.leader.joint_count(), checkpoint_path);

  const Skeleton skeleton = Skeleton::mocap18();
  const CoupleSequence normalized = normalize_couple(input, skeleton);
  const int start = normalized.frame_count() - cfg.in_len;
  const StepPredictor step = [&model](const MotionSequence& lead, const MotionSequence& foll) {
    return forward_collab(lead, foll, model);
  };
  auto [pred_l, pred_f] =
      rollout(step, normalized.leader.slice(start, normalized.frame_count()),
              normalized.follower.slice(start, normalized.frame_count()), horizon,
              model.config.step);

  CoupleSequence out;
  out.seq_id = input.seq_id + "-pred";
  out.aerial = input.aerial;
  out.couple = input.couple;
  out.repetition = input.repetition;
  out.leader = pred_l;
  out.follower = pred_f;
  save_sequence_csv(out_csv, out);
}

void cmd_triangulate(const std::string& cameras_path, const std::string& observations_path,
                     const std::string& out_csv) {
  const std::vector<Camera> cameras = load_cameras(cameras_path);

  std::ifstream in(observations_path);
  if (!in) throw IoError("cannot open " + observations_path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing observations header", 1);
  ++line_no;
  if (line != "point_id,cam1,u1,v1,cam2,u2,v2") {
    throw ParseError("unexpected observations header", line_no);
  }

  std::ostringstream out;
  out << "point_id,x,y,z,reproj_px,status\n";
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 7) throw ParseError("expected 7 observation fields", line_no);

    const std::string& point_id = f[0];
    int cam1 = 0, cam2 = 0;
    double u1 = 0, v1 = 0, u2 = 0, v2 = 0;
    try {
      cam1 = std::stoi(f[1]);
      u1 = std::stod(f[2]);
      v1 = std::stod(f[3]);
      cam2 = std::stoi(f[4]);
      u2 = std::stod(f[5]);
      v2 = std::stod(f[6]);
    } catch (const std::exception&) {
      throw ParseError("bad numeric observation field", line_no);
    }

    // per-row failures are reported in the status column, not fatal
    if (cam1 < 0 || cam1 >= static_cast<int>(cameras.size()) || cam2 < 0 ||
        cam2 >= static_cast<int>(cameras.size())) {
      out << point_id << ",,,,,unknown-camera\n";
      continue;
    }
    try {
      const Ray r1 = backproject(cameras[static_cast<size_t>(cam1)], {u1, v1});
      const Ray r2 = backproject(cameras[static_cast<size_t>(cam2)], {u2, v2});
      const Eigen::Vector3d point = triangulate_two_rays(r1, r2);
      const Eigen::Vector2d p1 = project(cameras[static_cast<size_t>(cam1)], point);
      const Eigen::Vector2d p2 = project(cameras[static_cast<size_t>(cam2)], point);
      const double reproj =
          0.5 * ((p1 - Eigen::Vector2d(u1, v1)).norm() + (p2 - Eigen::Vector2d(u2, v2)).norm());
      out << point_id << "," << format_double(point.x()) << "," << format_double(point.y())
          << "," << format_double(point.z()) << "," << format_double(reproj) << ",ok\n";
    } catch (const DegeneracyError&) {
      out << point_id << ",,,,,parallel-rays\n";
    }
  }

  std::ofstream file(out_csv, std::ios::trunc);
  if (!file) throw IoError("cannot write " + out_csv);
  file << out.str();
  if (!file) throw IoError("write failed for " + out_csv);
}

void cmd_report(const std::vector<std::string>& metrics_csvs, const std::string& out_dir) {
  if (metrics_csvs.empty()) throw ContractError("report: no metrics files given");

  struct Column {
    std::string label;
    MetricsReport report;
  };
  std::vector<Column> columns;
  for (const std::string& path : metrics_csvs) {
    Column col;
    col.label = std::filesystem::path(path).stem().string();
    col.report = MetricsReport::load_csv(path);
    columns.push_back(std::move(col));
  }

  std::filesystem::create_directories(out_dir);
  for (const char* metric : kMetricNames) {
    for (const char* role : kRoleNames) {
      std::string metric_lower = metric;
      std::transform(metric_lower.begin(), metric_lower.end(), metric_lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      const std::string path = out_dir + "/" + metric_lower + "_" + role + ".csv";
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw IoError("cannot write " + path);
      out << "horizon_ms";
      for (const Column& col : columns) out << "," << col.label;
      out << "\n";
      for (int horizon_ms : kHorizonsMs) {
        out << horizon_ms;
        for (const Column& col : columns) {
          const MetricsReport::Row* row = col.report.find(metric, role, "AVG", horizon_ms);
          if (!row) throw ParseError("report " + col.label + " is missing " + metric + "/" +
                                     role + "/AVG/" + std::to_string(horizon_ms));
          out << "," << format_double(row->value_mm);
        }
        out << "\n";
      }
    }
  }
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const NumericError*>(&error)) return 4;
  if (dynamic_cast<const DegeneracyError*>(&error)) return 4;
  if (dynamic_cast<const ParseError*>(&error)) return 3;
  if (dynamic_cast<const IoError*>(&error)) return 3;
  if (dynamic_cast<const ContractError*>(&error)) return 2;
  if (dynamic_cast<const DimensionError*>(&error)) return 2;
  return 1;
}

}  // namespace xmotion
