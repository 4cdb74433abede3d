#include "xmotion/model.hpp"

#include <cmath>

#include "xmotion/rng.hpp"

namespace xmotion {

namespace {

Tensor uniform_tensor(std::vector<int> shape, double lo, double hi, std::mt19937_64& rng) {
  int n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<size_t>(n));
  for (double& v : data) v = uniform(rng, lo, hi);
  return Tensor::from_data(std::move(shape), std::move(data));
}

MlpParams init_mlp(int in, int hidden, int out, std::mt19937_64& rng,
                   double output_gain = 1.0) {
  MlpParams p;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = output_gain / std::sqrt(static_cast<double>(hidden));
  p.w1 = uniform_tensor({in, hidden}, -s1, s1, rng);
  p.b1 = Tensor::zeros({hidden});
  p.w2 = uniform_tensor({hidden, out}, -s2, s2, rng);
  p.b2 = Tensor::zeros({out});
  return p;
}

// Centered pose deltas sit well below unit scale, so plain 1/sqrt(fan_in)
// embeddings would start every softmax in its flat region; the query/key
// output layers get extra gain to keep the dot-product scores responsive.
constexpr double kQueryKeyGain = 8.0;

GcnParams::Layer init_gcn_layer(int nodes, int in, int out, std::mt19937_64& rng) {
  GcnParams::Layer layer;
  std::vector<double> adj(static_cast<size_t>(nodes) * nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      adj[static_cast<size_t>(i) * nodes + j] = (i == j ? 1.0 : 0.0) + uniform(rng, -0.01, 0.01);
    }
  }
  layer.adjacency = Tensor::from_data({nodes, nodes}, std::move(adj));
  const double s = 1.0 / std::sqrt(static_cast<double>(in));
  layer.weight = uniform_tensor({in, out}, -s, s, rng);
  return layer;
}

}  // namespace

void ModelConfig::validate() const {
  if (joints < 1 || window < 1 || step < 1 || d_model < 1 || gcn_layers < 1 ||
      gcn_hidden < 1 || heads_key < 1 || heads_value < 1) {
    throw ContractError("model config extents must be positive");
  }
  if (dct_coeffs < 0 || coeff_count() > window + step) {
    throw ContractError("model config: DCT coefficient count exceeds window length");
  }
  if (d_model % heads_key != 0) {
    throw ContractError("model config: heads_key must divide d_model");
  }
  if (value_dim() % heads_value != 0) {
    throw ContractError("model config: heads_value must divide the value dimension");
  }
}

void MlpParams::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + "w1", &w1);
  out.emplace_back(prefix + "b1", &b1);
  out.emplace_back(prefix + "w2", &w2);
  out.emplace_back(prefix + "b2", &b2);
}

void GcnParams::collect(const std::string& prefix, ParamRefs& out) {
  for (size_t i = 0; i < layers.size(); ++i) {
    out.emplace_back(prefix + "layer" + std::to_string(i) + ".adjacency", &layers[i].adjacency);
    out.emplace_back(prefix + "layer" + std::to_string(i) + ".weight", &layers[i].weight);
  }
}

void BaseModelParams::collect(const std::string& prefix, ParamRefs& out) {
  query_mlp.collect(prefix + "query_mlp.", out);
  key_mlp.collect(prefix + "key_mlp.", out);
  gcn.collect(prefix + "gcn.", out);
}

BaseModelParams init_base_params(const ModelConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  BaseModelParams p;
  p.query_mlp = init_mlp(cfg.window_input_dim(), cfg.d_model, cfg.d_model, rng, kQueryKeyGain);
  p.key_mlp = init_mlp(cfg.window_input_dim(), cfg.d_model, cfg.d_model, rng, kQueryKeyGain);

  const int nodes = cfg.joints * 3;
  const int c = cfg.coeff_count();
  std::vector<int> widths;
  widths.push_back(2 * c);  // aggregated values + query-window DCT
  for (int l = 1; l < cfg.gcn_layers; ++l) widths.push_back(cfg.gcn_hidden);
  widths.push_back(c);
  for (int l = 0; l < cfg.gcn_layers; ++l) {
    p.gcn.layers.push_back(init_gcn_layer(nodes, widths[static_cast<size_t>(l)],
                                          widths[static_cast<size_t>(l) + 1], rng));
  }
  return p;
}

Tensor mlp_forward(const Tensor& rows, const MlpParams& p) {
  const Tensor hidden = tanh(add_rowvec(matmul(rows, p.w1), p.b1));
  return add_rowvec(matmul(hidden, p.w2), p.b2);
}

Tensor encode_query(const Tensor& query_row, const MlpParams& p) {
  if (query_row.rows() != 1) throw DimensionError("encode_query expects a single row");
  return mlp_forward(query_row, p);
}

Tensor encode_keys(const Tensor& key_rows, const MlpParams& p) { return mlp_forward(key_rows, p); }

Tensor attention_weights(const AttentionState& state) {
  const int n = state.keys.rows();
  const int d = state.keys.cols();
  if (state.query.cols() != d) throw DimensionError("attend: query width differs from keys");
  if (state.values.rows() != n) throw DimensionError("attend: key and value row counts differ");
  const Tensor scores = scale(matmul(state.keys, reshape(state.query, {d, 1})),
                              1.0 / std::sqrt(static_cast<double>(d)));
  return softmax(scores, 0);  // N x 1
}

Tensor attend(const AttentionState& state) {
  const Tensor weights = attention_weights(state);
  return matmul(reshape(weights, {1, state.keys.rows()}), state.values);
}

Tensor gcn_predict(const Tensor& aggregated, const Tensor& last_window_dct,
                   const GcnParams& gcn, const ModelConfig& cfg) {
  const int c = cfg.coeff_count();
  const int nodes = cfg.joints * 3;
  if (aggregated.size() != cfg.value_dim() || last_window_dct.size() != cfg.value_dim()) {
    throw DimensionError("gcn_predict: inputs do not match the configured value dimension");
  }
  const Tensor agg_nodes = transpose(reshape(aggregated, {c, nodes}));
  const Tensor dct_nodes = transpose(reshape(last_window_dct, {c, nodes}));
  Tensor h = concat_cols(agg_nodes, dct_nodes);  // nodes x 2C
  for (size_t l = 0; l < gcn.layers.size(); ++l) {
    h = matmul(matmul(gcn.layers[l].adjacency, h), gcn.layers[l].weight);
    if (l + 1 < gcn.layers.size()) h = tanh(h);
  }
  const Tensor with_residual = add(h, dct_nodes);
  return reshape(transpose(with_residual), {1, cfg.value_dim()});
}

Tensor sequence_to_row(const MotionSequence& window) {
  const int frames = window.frame_count();
  const int joints = window.joint_count();
  std::vector<double> data;
  data.reserve(static_cast<size_t>(frames) * joints * 3);
  for (const Pose& pose : window.frames) {
    for (int j = 0; j < joints; ++j) {
      for (int axis = 0; axis < 3; ++axis) data.push_back(pose(j, axis) * kCoordinateScale);
    }
  }
  return Tensor::from_data({1, frames * joints * 3}, std::move(data));
}

Tensor windows_to_rows(const std::vector<MotionSequence>& windows) {
  if (windows.empty()) throw ContractError("windows_to_rows: empty bank");
  std::vector<Tensor> rows;
  rows.reserve(windows.size());
  for (const MotionSequence& w : windows) rows.push_back(sequence_to_row(w));
  return concat_rows(rows);
}

namespace {

Tensor dct_coeffs_to_row(const DctCoeffs& coeffs) {
  const int c = static_cast<int>(coeffs.coeffs.rows());
  const int cols = static_cast<int>(coeffs.coeffs.cols());
  std::vector<double> data(static_cast<size_t>(c) * cols);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < cols; ++j) {
      data[static_cast<size_t>(i) * cols + j] = coeffs.coeffs(i, j) * kCoordinateScale;
    }
  }
  return Tensor::from_data({1, c * cols}, std::move(data));
}

}  // namespace

Tensor encode_value_rows(const std::vector<MotionSequence>& value_windows, int coeff_count) {
  if (value_windows.empty()) throw ContractError("encode_value_rows: empty bank");
  std::vector<Tensor> rows;
  rows.reserve(value_windows.size());
  for (const MotionSequence& w : value_windows) {
    rows.push_back(dct_coeffs_to_row(pad_and_encode_value(w, w.frame_count(), coeff_count)));
  }
  return concat_rows(rows);
}

Tensor query_padded_dct(const MotionSequence& query_window, int step, int coeff_count) {
  MotionSequence padded = query_window;
  const Pose last = padded.frames.back();
  for (int i = 0; i < step; ++i) padded.frames.push_back(last);
  return dct_coeffs_to_row(pad_and_encode_value(padded, padded.frame_count(), coeff_count));
}

MotionSequence prediction_to_sequence(const Tensor& pred, int joints, double fps) {
  if (pred.rank() != 2 || pred.shape()[1] != joints * 3) {
    throw DimensionError("prediction_to_sequence: tensor is not T x J*3");
  }
  MotionSequence out;
  out.fps = fps;
  const int frames = pred.shape()[0];
  out.frames.resize(static_cast<size_t>(frames), Pose(joints, 3));
  for (int f = 0; f < frames; ++f) {
    for (int j = 0; j < joints; ++j) {
      for (int axis = 0; axis < 3; ++axis) {
        out.frames[static_cast<size_t>(f)](j, axis) = pred.at(f, j * 3 + axis);
      }
    }
  }
  return out;
}

MotionSequence center_on_last_frame(const MotionSequence& history, Pose& reference) {
  reference = history.frames.back();
  MotionSequence centered = history;
  for (Pose& frame : centered.frames) frame -= reference;
  return centered;
}

Tensor decode_prediction(const Tensor& pred_dct, const Pose& reference, const ModelConfig& cfg) {
  const int c = cfg.coeff_count();
  const int window_len = cfg.window + cfg.step;
  const Eigen::MatrixXd basis = dct_basis(window_len).topRows(c);
  std::vector<double> basis_t(static_cast<size_t>(window_len) * c);
  for (int f = 0; f < window_len; ++f)
    for (int k = 0; k < c; ++k) basis_t[static_cast<size_t>(f) * c + k] = basis(k, f);
  const Tensor decode_basis = Tensor::from_data({window_len, c}, std::move(basis_t));

  const Tensor decoded = matmul(decode_basis, reshape(pred_dct, {c, cfg.joints * 3}));
  const Tensor last_frames = scale(slice_rows(decoded, cfg.window, window_len),
                                   1.0 / kCoordinateScale);
  std::vector<double> ref_flat(static_cast<size_t>(cfg.joints) * 3);
  for (int j = 0; j < cfg.joints; ++j)
    for (int axis = 0; axis < 3; ++axis) ref_flat[static_cast<size_t>(j) * 3 + axis] = reference(j, axis);
  return add_rowvec(last_frames, Tensor::from_data({cfg.joints * 3}, std::move(ref_flat)));
}

Tensor forward_single_tensor(const MotionSequence& history, const BaseModelParams& params,
                             const ModelConfig& cfg) {
  cfg.validate();
  if (history.joint_count() != cfg.joints) {
    throw DimensionError("forward_single: history joint count does not match config");
  }
  // work relative to the last observed frame: trajectories stay small, and a
  // zero predictor decodes exactly back to that frame
  Pose reference;
  const MotionSequence centered = center_on_last_frame(history, reference);
  const SubSequenceBank bank = extract_windows(centered, cfg.window, cfg.step);
  const int c = cfg.coeff_count();

  AttentionState state;
  state.query = encode_query(sequence_to_row(bank.query_window), params.query_mlp);
  state.keys = encode_keys(windows_to_rows(bank.key_windows), params.key_mlp);
  state.values = encode_value_rows(bank.value_windows, c);

  const Tensor qdct = query_padded_dct(bank.query_window, cfg.step, c);
  const Tensor aggregated = attend(state);
  const Tensor pred_dct = gcn_predict(aggregated, qdct, params.gcn, cfg);
  return decode_prediction(pred_dct, reference, cfg);
}

MotionSequence forward_single(const MotionSequence& history, const BaseModelParams& params,
                              const ModelConfig& cfg) {
  return prediction_to_sequence(forward_single_tensor(history, params, cfg), cfg.joints,
                                history.fps);
}

}  // namespace xmotion
