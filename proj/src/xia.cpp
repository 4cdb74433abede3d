#include "xmotion/xia.hpp"

#include <cmath>

#include "xmotion/rng.hpp"

namespace xmotion {

namespace {

// Small-gain identity composite: fc2(tanh(fc1(x))) ~ x at init.
constexpr double kFcInitGain = 0.1;

Tensor uniform_tensor(std::vector<int> shape, double lo, double hi, std::mt19937_64& rng) {
  int n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<size_t>(n));
  for (double& v : data) v = uniform(rng, lo, hi);
  return Tensor::from_data(std::move(shape), std::move(data));
}

Tensor scaled_identity_plus_noise(int dim, double diag, double noise, std::mt19937_64& rng) {
  std::vector<double> data(static_cast<size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      data[static_cast<size_t>(i) * dim + j] =
          (i == j ? diag : 0.0) + (noise > 0 ? uniform(rng, -noise, noise) : 0.0);
    }
  }
  return Tensor::from_data({dim, dim}, std::move(data));
}

}  // namespace

VariantKind variant_from_string(const std::string& name) {
  if (name == "base") return VariantKind::BaseIndependent;
  if (name == "2pcat") return VariantKind::Concat2P;
  if (name == "xia") return VariantKind::Xia;
  if (name == "xia-nores") return VariantKind::XiaNoResidual;
  if (name == "xia-self") return VariantKind::XiaSelfAttention;
  throw ContractError("unknown variant: " + name +
                      " (expected base|2pcat|xia|xia-nores|xia-self)");
}

std::string variant_name(VariantKind kind) {
  switch (kind) {
    case VariantKind::BaseIndependent: return "base";
    case VariantKind::Concat2P: return "2pcat";
    case VariantKind::Xia: return "xia";
    case VariantKind::XiaNoResidual: return "xia-nores";
    case VariantKind::XiaSelfAttention: return "xia-self";
  }
  throw ContractError("unknown variant kind");
}

void XiaModuleParams::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + "wq", &wq);
  out.emplace_back(prefix + "bq", &bq);
  out.emplace_back(prefix + "wk", &wk);
  out.emplace_back(prefix + "bk", &bk);
  out.emplace_back(prefix + "wv", &wv);
  out.emplace_back(prefix + "bv", &bv);
  out.emplace_back(prefix + "wo", &wo);
  out.emplace_back(prefix + "bo", &bo);
  out.emplace_back(prefix + "fc1_w", &fc1_w);
  out.emplace_back(prefix + "fc1_b", &fc1_b);
  out.emplace_back(prefix + "fc2_w", &fc2_w);
  out.emplace_back(prefix + "fc2_b", &fc2_b);
}

XiaModuleParams init_xia_module(int dim, int heads, std::mt19937_64& rng) {
  if (dim < 1 || heads < 1 || dim % heads != 0) {
    throw ContractError("xia module: heads must divide the refined dimension");
  }
  XiaModuleParams p;
  p.heads = heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  p.wq = uniform_tensor({dim, dim}, -s, s, rng);
  p.wk = uniform_tensor({dim, dim}, -s, s, rng);
  p.wv = uniform_tensor({dim, dim}, -s, s, rng);
  p.wo = uniform_tensor({dim, dim}, -s, s, rng);
  p.bq = Tensor::zeros({dim});
  p.bk = Tensor::zeros({dim});
  p.bv = Tensor::zeros({dim});
  p.bo = Tensor::zeros({dim});
  p.fc1_w = scaled_identity_plus_noise(dim, kFcInitGain, 0.01 * s, rng);
  p.fc1_b = Tensor::zeros({dim});
  p.fc2_w = scaled_identity_plus_noise(dim, 1.0 / kFcInitGain, 0.01 * s, rng);
  p.fc2_b = Tensor::zeros({dim});
  return p;
}

XiaModuleParams passthrough_xia_module(int dim, int heads, double eps) {
  XiaModuleParams p;
  p.heads = heads;
  p.wq = Tensor::identity(dim);
  p.wk = Tensor::identity(dim);
  p.wv = Tensor::zeros({dim, dim});
  p.wo = Tensor::zeros({dim, dim});
  p.bq = Tensor::zeros({dim});
  p.bk = Tensor::zeros({dim});
  p.bv = Tensor::zeros({dim});
  p.bo = Tensor::zeros({dim});
  std::mt19937_64 unused(0);
  p.fc1_w = scaled_identity_plus_noise(dim, eps, 0.0, unused);
  p.fc1_b = Tensor::zeros({dim});
  p.fc2_w = scaled_identity_plus_noise(dim, 1.0 / eps, 0.0, unused);
  p.fc2_b = Tensor::zeros({dim});
  return p;
}

Tensor xia_refine_bank(const Tensor& v_bank, const Tensor& w_bank,
                       const XiaModuleParams& params, VariantKind kind) {
  if (v_bank.rank() != 2 || w_bank.rank() != 2) {
    throw ContractError("xia: banks must be rank-2");
  }
  if (v_bank.shape() != w_bank.shape()) {
    throw ContractError("xia: refined and partner banks must share shape");
  }
  const int n = v_bank.shape()[0];
  const int dim = v_bank.shape()[1];
  if (dim != params.wq.shape()[0]) throw ContractError("xia: bank width differs from module");
  const int heads = params.heads;
  const int head_dim = dim / heads;

  const Tensor& query_src = kind == VariantKind::XiaSelfAttention ? v_bank : w_bank;
  const Tensor q_all = add_rowvec(matmul(query_src, params.wq), params.bq);
  const Tensor k_all = add_rowvec(matmul(v_bank, params.wk), params.bk);
  const Tensor u_all = add_rowvec(matmul(v_bank, params.wv), params.bv);

  // per row: chunk into heads, attend across chunks, stitch back
  std::vector<Tensor> mixed_rows;
  mixed_rows.reserve(static_cast<size_t>(n));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (int i = 0; i < n; ++i) {
    const Tensor qc = reshape(slice_rows(q_all, i, i + 1), {heads, head_dim});
    const Tensor kc = reshape(slice_rows(k_all, i, i + 1), {heads, head_dim});
    const Tensor uc = reshape(slice_rows(u_all, i, i + 1), {heads, head_dim});
    const Tensor weights = softmax(scale(matmul(qc, transpose(kc)), inv_sqrt), 1);
    mixed_rows.push_back(reshape(matmul(weights, uc), {1, dim}));
  }
  const Tensor mha = add_rowvec(matmul(concat_rows(mixed_rows), params.wo), params.bo);

  const Tensor pre_fc = kind == VariantKind::XiaNoResidual ? mha : add(mha, v_bank);
  const Tensor hidden = tanh(add_rowvec(matmul(pre_fc, params.fc1_w), params.fc1_b));
  return add_rowvec(matmul(hidden, params.fc2_w), params.fc2_b);
}

Tensor xia_refine(const Tensor& v, const Tensor& w, const XiaModuleParams& params,
                  VariantKind kind) {
  if (v.rows() != 1 || w.rows() != 1) throw ContractError("xia_refine expects single rows");
  return xia_refine_bank(reshape(v, {1, v.cols()}), reshape(w, {1, w.cols()}), params, kind);
}

void CollabModel::XiaPair::collect(const std::string& prefix, ParamRefs& out) {
  key.collect(prefix + "key.", out);
  value.collect(prefix + "value.", out);
}

void CollabModel::collect(const std::string& prefix, ParamRefs& out) {
  leader_base.collect(prefix + "leader.", out);
  if (follower_base) follower_base->collect(prefix + "follower.", out);
  if (leader_xia) leader_xia->collect(prefix + "leader.xia_", out);
  if (follower_xia) follower_xia->collect(prefix + "follower.xia_", out);
}

long CollabModel::param_count() const {
  CollabModel copy = *this;
  ParamRefs refs;
  copy.collect("", refs);
  long total = 0;
  for (auto& [name, tensor] : refs) total += tensor->size();
  return total;
}

ModelConfig CollabModel::branch_config() const {
  if (variant != VariantKind::Concat2P) return config;
  ModelConfig doubled = config;
  doubled.joints = 2 * config.joints;
  return doubled;
}

CollabModel make_variant(VariantKind kind, const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  CollabModel model;
  model.config = cfg;
  model.variant = kind;

  std::mt19937_64 leader_rng(mix_seed(seed, 1));
  std::mt19937_64 follower_rng(mix_seed(seed, 2));

  if (kind == VariantKind::Concat2P) {
    model.leader_base = init_base_params(model.branch_config(), leader_rng);
    return model;
  }

  model.leader_base = init_base_params(cfg, leader_rng);
  model.follower_base = init_base_params(cfg, follower_rng);
  if (kind == VariantKind::BaseIndependent) return model;

  std::mt19937_64 xia_rng(mix_seed(seed, 3));
  CollabModel::XiaPair leader_pair, follower_pair;
  leader_pair.key = init_xia_module(cfg.d_model, cfg.heads_key, xia_rng);
  leader_pair.value = init_xia_module(cfg.value_dim(), cfg.heads_value, xia_rng);
  follower_pair.key = init_xia_module(cfg.d_model, cfg.heads_key, xia_rng);
  follower_pair.value = init_xia_module(cfg.value_dim(), cfg.heads_value, xia_rng);
  model.leader_xia = std::move(leader_pair);
  model.follower_xia = std::move(follower_pair);
  return model;
}

void refine_banks(AttentionState& leader, AttentionState& follower, const CollabModel& model) {
  if (!model.leader_xia || !model.follower_xia) {
    throw ContractError("refine_banks: model variant carries no XIA modules");
  }
  if (leader.keys.rows() != follower.keys.rows()) {
    throw ContractError("refine_banks: window counts differ between persons");
  }
  const VariantKind kind = model.variant;
  const Tensor leader_keys = xia_refine_bank(leader.keys, follower.keys, model.leader_xia->key, kind);
  const Tensor follower_keys =
      xia_refine_bank(follower.keys, leader.keys, model.follower_xia->key, kind);
  const Tensor leader_values =
      xia_refine_bank(leader.values, follower.values, model.leader_xia->value, kind);
  const Tensor follower_values =
      xia_refine_bank(follower.values, leader.values, model.follower_xia->value, kind);
  leader.keys = leader_keys;
  leader.values = leader_values;
  follower.keys = follower_keys;
  follower.values = follower_values;
}

namespace {

struct BranchInputs {
  AttentionState state;
  Tensor qdct;
  Pose reference;
};

BranchInputs encode_branch(const MotionSequence& history, const BaseModelParams& params,
                           const ModelConfig& cfg) {
  BranchInputs b;
  const MotionSequence centered = center_on_last_frame(history, b.reference);
  const SubSequenceBank bank = extract_windows(centered, cfg.window, cfg.step);
  b.state.query = encode_query(sequence_to_row(bank.query_window), params.query_mlp);
  b.state.keys = encode_keys(windows_to_rows(bank.key_windows), params.key_mlp);
  b.state.values = encode_value_rows(bank.value_windows, cfg.coeff_count());
  b.qdct = query_padded_dct(bank.query_window, cfg.step, cfg.coeff_count());
  return b;
}

Tensor decode_branch(const Tensor& aggregated, const BranchInputs& inputs,
                     const BaseModelParams& params, const ModelConfig& cfg) {
  const Tensor pred_dct = gcn_predict(aggregated, inputs.qdct, params.gcn, cfg);
  return decode_prediction(pred_dct, inputs.reference, cfg);
}

MotionSequence concat_people(const MotionSequence& leader, const MotionSequence& follower) {
  MotionSequence out;
  out.fps = leader.fps;
  out.frames.reserve(leader.frames.size());
  for (size_t f = 0; f < leader.frames.size(); ++f) {
    Pose joined(leader.frames[f].rows() + follower.frames[f].rows(), 3);
    joined << leader.frames[f], follower.frames[f];
    out.frames.push_back(std::move(joined));
  }
  return out;
}

}  // namespace

std::pair<Tensor, Tensor> forward_collab_tensor(const MotionSequence& leader_hist,
                                                const MotionSequence& follower_hist,
                                                const CollabModel& model) {
  if (leader_hist.frame_count() != follower_hist.frame_count()) {
    throw ContractError("forward_collab: histories differ in length");
  }
  const ModelConfig& cfg = model.config;

  if (model.variant == VariantKind::Concat2P) {
    const ModelConfig joined_cfg = model.branch_config();
    const MotionSequence joined = concat_people(leader_hist, follower_hist);
    const Tensor pred = forward_single_tensor(joined, model.leader_base, joined_cfg);
    // columns split back into the two persons
    const int jc = cfg.joints * 3;
    const Tensor pred_t = transpose(pred);
    const Tensor leader_pred = transpose(slice_rows(pred_t, 0, jc));
    const Tensor follower_pred = transpose(slice_rows(pred_t, jc, 2 * jc));
    return {leader_pred, follower_pred};
  }

  if (model.variant == VariantKind::BaseIndependent) {
    return {forward_single_tensor(leader_hist, model.leader_base, cfg),
            forward_single_tensor(follower_hist, *model.follower_base, cfg)};
  }

  BranchInputs leader = encode_branch(leader_hist, model.leader_base, cfg);
  BranchInputs follower = encode_branch(follower_hist, *model.follower_base, cfg);
  refine_banks(leader.state, follower.state, model);
  const Tensor leader_pred = decode_branch(attend(leader.state), leader, model.leader_base, cfg);
  const Tensor follower_pred =
      decode_branch(attend(follower.state), follower, *model.follower_base, cfg);
  return {leader_pred, follower_pred};
}

std::pair<MotionSequence, MotionSequence> forward_collab(const MotionSequence& leader_hist,
                                                         const MotionSequence& follower_hist,
                                                         const CollabModel& model) {
  auto [leader_pred, follower_pred] = forward_collab_tensor(leader_hist, follower_hist, model);
  return {prediction_to_sequence(leader_pred, model.config.joints, leader_hist.fps),
          prediction_to_sequence(follower_pred, model.config.joints, follower_hist.fps)};
}

CollabModel bind_model(const CollabModel& model, Tape& tape) {
  CollabModel bound = model;
  ParamRefs refs;
  bound.collect("", refs);
  for (auto& [name, tensor] : refs) *tensor = tape.watch(*tensor, name);
  return bound;
}

}  // namespace xmotion
