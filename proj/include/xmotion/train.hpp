#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "xmotion/data.hpp"
#include "xmotion/metrics.hpp"
#include "xmotion/xia.hpp"

namespace xmotion {

// Differentiable mean per-joint Euclidean distance in millimetres between a
// predicted {T, J*3} tensor and ground-truth frames. The couple loss averages
// the two persons and therefore equals JME numerically.
Tensor person_loss(const Tensor& pred, const MotionSequence& target);
Tensor couple_loss(const Tensor& pred_l, const Tensor& pred_f, const MotionSequence& gt_l,
                   const MotionSequence& gt_f);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);
  // params and grads must line up index-for-index across calls.
  void step(ParamRefs& params, const std::vector<Tensor>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainConfig {
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int in_len = 50;        // observed frames per training sample
  int sample_stride = 5;  // window stride when mining samples
};

struct LossPoint {
  int epoch = 0;
  int step = 0;  // global step
  double loss = 0;
};

struct TrainResult {
  std::vector<LossPoint> curve;
};

// Adam training, deterministic under cfg.seed; sequences are couple-
// normalized before windowing. Updates the model in place. Throws
// NumericError naming the step if the loss stops being finite.
TrainResult train(CollabModel& model, const std::vector<CoupleSequence>& train_set,
                  const TrainConfig& cfg, const Skeleton& skeleton);

void save_loss_curve(const std::string& path, const std::vector<LossPoint>& curve);

// One prediction step for both persons given equal-length histories.
using StepPredictor = std::function<std::pair<MotionSequence, MotionSequence>(
    const MotionSequence&, const MotionSequence&)>;

// Iterated prediction: each predicted chunk is appended to the history and
// the model re-windowed, until horizon_frames are available (then truncated).
std::pair<MotionSequence, MotionSequence> rollout(const StepPredictor& step,
                                                  MotionSequence leader_history,
                                                  MotionSequence follower_history,
                                                  int horizon_frames, int step_len);

// Predictor over one normalized evaluation window: may look at the first
// in_len frames only and returns `horizon` predicted frames per person.
using WindowPredictor = std::function<std::pair<MotionSequence, MotionSequence>(
    const CoupleSequence& normalized_window, int in_len, int horizon)>;

WindowPredictor model_window_predictor(const CollabModel& model);

struct EvalConfig {
  int in_len = 50;
  int horizon = 25;  // frames; 1000 ms at 25 FPS
  int subsequences = 64;
  bool per_joint = false;
};

// Per test sub-sequence: couple-normalize, predict to the horizon, score
// JME/SME/AME per role at every horizon cut, aggregate per aerial plus a
// count-weighted AVG row.
MetricsReport evaluate(const WindowPredictor& predictor,
                       const std::vector<CoupleSequence>& test_set, const Skeleton& skeleton,
                       const EvalConfig& cfg);
MetricsReport evaluate(const CollabModel& model, const std::vector<CoupleSequence>& test_set,
                       const Skeleton& skeleton, const EvalConfig& cfg);

}  // namespace xmotion
