#pragma once

#include <optional>
#include <string>

#include "xmotion/model.hpp"

namespace xmotion {

enum class VariantKind { BaseIndependent, Concat2P, Xia, XiaNoResidual, XiaSelfAttention };

VariantKind variant_from_string(const std::string& name);
std::string variant_name(VariantKind kind);

// One cross-interaction refiner: multi-head attention (query projected from
// the partner vector, key/value from the vector being refined) plus two FC
// layers of the input dimension with tanh between. The projected q/k/v are
// split into `heads` chunks and scaled dot-product attention runs across the
// chunks, so the partner genuinely steers how the value chunks mix.
struct XiaModuleParams {
  int heads = 1;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // dim x dim projections + biases
  Tensor fc1_w, fc1_b, fc2_w, fc2_b;
  void collect(const std::string& prefix, ParamRefs& out);
};

XiaModuleParams init_xia_module(int dim, int heads, std::mt19937_64& rng);
// Parameter setting that makes the refiner the identity map to ~1e-12 of the
// input scale: zeroed MHA value/output path, FC scaled through tanh's linear
// regime (w1 = eps*I, w2 = I/eps).
XiaModuleParams passthrough_xia_module(int dim, int heads, double eps = 1e-8);

// Refine v (one row) with partner w. kind selects the ablation behavior:
// XiaNoResidual drops the "+ v" inside FC, XiaSelfAttention queries with v
// itself so w is ignored.
Tensor xia_refine(const Tensor& v, const Tensor& w, const XiaModuleParams& params,
                  VariantKind kind = VariantKind::Xia);
// Row-paired refinement of a whole bank: row i of v_bank is refined with row
// i of w_bank and never sees any other row.
Tensor xia_refine_bank(const Tensor& v_bank, const Tensor& w_bank,
                       const XiaModuleParams& params, VariantKind kind = VariantKind::Xia);

// Two-branch collaborative model. BaseIndependent keeps two disjoint base
// predictors; Concat2P runs one base predictor over the concatenated 2J
// skeleton (stored in the leader slot); the XIA variants add four refiners.
struct CollabModel {
  ModelConfig config;  // per-person
  VariantKind variant = VariantKind::Xia;

  BaseModelParams leader_base;
  std::optional<BaseModelParams> follower_base;
  struct XiaPair {
    XiaModuleParams key, value;
    void collect(const std::string& prefix, ParamRefs& out);
  };
  std::optional<XiaPair> leader_xia, follower_xia;

  void collect(const std::string& prefix, ParamRefs& out);
  long param_count() const;
  ModelConfig branch_config() const;  // 2J config for Concat2P
};

CollabModel make_variant(VariantKind kind, const ModelConfig& cfg, std::uint64_t seed);

// Refine both banks in place (keys and values of each person, using the
// partner's matching rows).
void refine_banks(AttentionState& leader, AttentionState& follower, const CollabModel& model);

// One prediction step for both persons; histories must be equally long and
// already couple-normalized. Results are {T, J*3} tensors in millimetres.
std::pair<Tensor, Tensor> forward_collab_tensor(const MotionSequence& leader_hist,
                                                const MotionSequence& follower_hist,
                                                const CollabModel& model);
std::pair<MotionSequence, MotionSequence> forward_collab(const MotionSequence& leader_hist,
                                                         const MotionSequence& follower_hist,
                                                         const CollabModel& model);

CollabModel bind_model(const CollabModel& model, Tape& tape);

}  // namespace xmotion
