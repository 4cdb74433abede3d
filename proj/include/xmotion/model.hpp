#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "xmotion/motion.hpp"
#include "xmotion/tensor.hpp"

namespace xmotion {

// Coordinates enter the network scaled from millimetres into roughly unit
// range so the tanh nonlinearities operate away from saturation; predictions
// are scaled back before anything leaves the model.
inline constexpr double kCoordinateScale = 1e-3;

struct ModelConfig {
  int joints = 18;      // J
  int window = 10;      // M, key-window length
  int step = 10;        // T, frames predicted per forward pass
  int dct_coeffs = 0;   // C; 0 keeps the lossless M+T coefficients
  int d_model = 64;
  int gcn_layers = 4;
  int gcn_hidden = 64;
  int heads_key = 8;
  int heads_value = 1;

  int coeff_count() const { return dct_coeffs > 0 ? dct_coeffs : window + step; }
  int value_dim() const { return coeff_count() * joints * 3; }
  int window_input_dim() const { return window * joints * 3; }
  void validate() const;
};

using ParamRefs = std::vector<std::pair<std::string, Tensor*>>;

// Two affine layers with tanh between; queries and keys share this shape
// but never their weights.
struct MlpParams {
  Tensor w1, b1, w2, b2;
  void collect(const std::string& prefix, ParamRefs& out);
};

// Graph convolution stack over the J*3 trajectory nodes. Every layer owns a
// dense learnable adjacency; tanh between layers, none after the last.
struct GcnParams {
  struct Layer {
    Tensor adjacency;  // nodes x nodes
    Tensor weight;     // features_in x features_out
  };
  std::vector<Layer> layers;
  void collect(const std::string& prefix, ParamRefs& out);
};

struct BaseModelParams {
  MlpParams query_mlp;
  MlpParams key_mlp;
  GcnParams gcn;
  void collect(const std::string& prefix, ParamRefs& out);
};

struct AttentionState {
  Tensor query;   // 1 x d_model
  Tensor keys;    // N x d_model
  Tensor values;  // N x value_dim
};

BaseModelParams init_base_params(const ModelConfig& cfg, std::mt19937_64& rng);

// --- building blocks ---
Tensor mlp_forward(const Tensor& rows, const MlpParams& p);
Tensor encode_query(const Tensor& query_row, const MlpParams& p);
Tensor encode_keys(const Tensor& key_rows, const MlpParams& p);
// Softmax over scaled dot products Q.K_i / sqrt(d_model); returns sum_i a_i V_i.
Tensor attend(const AttentionState& state);
Tensor attention_weights(const AttentionState& state);  // N x 1
// Aggregated attention output and the query-window DCT feed the GCN; the
// query DCT is also the residual, so an all-zero stack predicts a frozen pose.
Tensor gcn_predict(const Tensor& aggregated, const Tensor& last_window_dct,
                   const GcnParams& gcn, const ModelConfig& cfg);

// --- sequence <-> tensor plumbing (applies kCoordinateScale) ---
Tensor sequence_to_row(const MotionSequence& window);
Tensor windows_to_rows(const std::vector<MotionSequence>& windows);
// DCT rows for the value windows, one window per row.
Tensor encode_value_rows(const std::vector<MotionSequence>& value_windows, int coeff_count);
// DCT of the query window extended by replicating its last frame `step` times.
Tensor query_padded_dct(const MotionSequence& query_window, int step, int coeff_count);
// pred: {T, J*3} in millimetres.
MotionSequence prediction_to_sequence(const Tensor& pred, int joints, double fps);

// Histories enter the network relative to their last observed frame; the
// reference pose is added back when predictions are decoded.
MotionSequence center_on_last_frame(const MotionSequence& history, Pose& reference);
Tensor decode_prediction(const Tensor& pred_dct, const Pose& reference, const ModelConfig& cfg);

// Full single-person forward pass; result is {T, J*3} in millimetres and
// differentiable w.r.t. any tape-bound parameters.
Tensor forward_single_tensor(const MotionSequence& history, const BaseModelParams& params,
                             const ModelConfig& cfg);
MotionSequence forward_single(const MotionSequence& history, const BaseModelParams& params,
                              const ModelConfig& cfg);

// --- generic parameter utilities ---
template <typename P>
P bind_params(const P& params, Tape& tape) {
  P bound = params;
  ParamRefs refs;
  bound.collect("", refs);
  for (auto& [name, tensor] : refs) *tensor = tape.watch(*tensor, name);
  return bound;
}

template <typename P>
long param_scalar_count(const P& params) {
  P copy = params;
  ParamRefs refs;
  copy.collect("", refs);
  long total = 0;
  for (auto& [name, tensor] : refs) total += tensor->size();
  return total;
}

}  // namespace xmotion
