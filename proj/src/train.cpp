#include "xmotion/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "xmotion/rng.hpp"

namespace xmotion {

namespace {

Tensor sequence_to_row_mm(const MotionSequence& window) {
  const int frames = window.frame_count();
  const int joints = window.joint_count();
  std::vector<double> data;
  data.reserve(static_cast<size_t>(frames) * joints * 3);
  for (const Pose& pose : window.frames) {
    for (int j = 0; j < joints; ++j) {
      for (int axis = 0; axis < 3; ++axis) data.push_back(pose(j, axis));
    }
  }
  return Tensor::from_data({frames, joints * 3}, std::move(data));
}

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

}  // namespace

Tensor person_loss(const Tensor& pred, const MotionSequence& target) {
  if (pred.rank() != 2 || pred.shape()[0] != target.frame_count() ||
      pred.shape()[1] != target.joint_count() * 3) {
    throw DimensionError("person_loss: prediction and target shapes differ");
  }
  const int frames = pred.shape()[0];
  const int joints = target.joint_count();
  const Tensor diff = sub(pred, sequence_to_row_mm(target));
  const Tensor sq = mul(diff, diff);
  const Tensor per_joint = reshape(sq, {frames * joints, 3});
  const Tensor dist = sqrt(matmul(per_joint, Tensor::full({3, 1}, 1.0)));
  return scale(sum(dist), 1.0 / (static_cast<double>(frames) * joints));
}

Tensor couple_loss(const Tensor& pred_l, const Tensor& pred_f, const MotionSequence& gt_l,
                   const MotionSequence& gt_f) {
  return scale(add(person_loss(pred_l, gt_l), person_loss(pred_f, gt_f)), 0.5);
}

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ParamRefs& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) throw ContractError("adam: params/grads size mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(static_cast<size_t>(params[i].second->size()), 0.0);
      v_[i].assign(static_cast<size_t>(params[i].second->size()), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].second;
    const Tensor& g = grads[i];
    if (g.shape() != p.shape()) throw ContractError("adam: gradient shape mismatch");
    std::vector<double> next = p.to_vector();
    for (int k = 0; k < p.size(); ++k) {
      const double gk = g.at(k);
      m_[i][static_cast<size_t>(k)] = beta1_ * m_[i][static_cast<size_t>(k)] + (1.0 - beta1_) * gk;
      v_[i][static_cast<size_t>(k)] =
          beta2_ * v_[i][static_cast<size_t>(k)] + (1.0 - beta2_) * gk * gk;
      const double mhat = m_[i][static_cast<size_t>(k)] / bc1;
      const double vhat = v_[i][static_cast<size_t>(k)] / bc2;
      next[static_cast<size_t>(k)] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    p = Tensor::from_data(p.shape(), std::move(next));
  }
}

namespace {

struct TrainSample {
  MotionSequence leader_hist, follower_hist;
  MotionSequence leader_target, follower_target;
};

std::vector<TrainSample> mine_samples(const std::vector<CoupleSequence>& train_set,
                                      const TrainConfig& cfg, int step_len,
                                      const Skeleton& skeleton) {
  std::vector<TrainSample> samples;
  for (const CoupleSequence& raw : train_set) {
    const CoupleSequence seq = normalize_couple(raw, skeleton);
    const int total = cfg.in_len + step_len;
    for (int start = 0; start + total <= seq.frame_count(); start += cfg.sample_stride) {
      TrainSample s;
      s.leader_hist = seq.leader.slice(start, start + cfg.in_len);
      s.follower_hist = seq.follower.slice(start, start + cfg.in_len);
      s.leader_target = seq.leader.slice(start + cfg.in_len, start + total);
      s.follower_target = seq.follower.slice(start + cfg.in_len, start + total);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

}  // namespace

TrainResult train(CollabModel& model, const std::vector<CoupleSequence>& train_set,
                  const TrainConfig& cfg, const Skeleton& skeleton) {
  if (train_set.empty()) throw ContractError("train: empty training set");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw ContractError("train: bad config");

  const int step_len = model.config.step;
  std::vector<TrainSample> samples = mine_samples(train_set, cfg, step_len, skeleton);
  if (samples.empty()) {
    throw InsufficientHistoryError("train: no sequence yields an in_len + T window");
  }

  AdamOptimizer optimizer(cfg.learning_rate);
  TrainResult result;
  int global_step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<size_t>(cfg.batch_size)) {
      const size_t batch_end =
          std::min(order.size(), batch_start + static_cast<size_t>(cfg.batch_size));

      Tape tape;
      CollabModel bound = bind_model(model, tape);
      Tensor total;
      for (size_t i = batch_start; i < batch_end; ++i) {
        const TrainSample& s = samples[order[i]];
        auto [pred_l, pred_f] = forward_collab_tensor(s.leader_hist, s.follower_hist, bound);
        const Tensor loss = couple_loss(pred_l, pred_f, s.leader_target, s.follower_target);
        total = total.defined() ? add(total, loss) : loss;
      }
      const Tensor batch_loss = scale(total, 1.0 / static_cast<double>(batch_end - batch_start));
      const double loss_value = batch_loss.at(0);
      if (!std::isfinite(loss_value)) {
        throw NumericError("training diverged at step " + std::to_string(global_step));
      }
      tape.backward(batch_loss);

      ParamRefs bound_refs;
      bound.collect("", bound_refs);
      std::vector<Tensor> grads;
      grads.reserve(bound_refs.size());
      for (auto& [name, tensor] : bound_refs) grads.push_back(tape.grad(*tensor));

      ParamRefs model_refs;
      model.collect("", model_refs);
      optimizer.step(model_refs, grads);

      result.curve.push_back({epoch, global_step, loss_value});
      ++global_step;
    }
  }
  return result;
}

void save_loss_curve(const std::string& path, const std::vector<LossPoint>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "epoch,step,loss\n";
  for (const LossPoint& p : curve) {
    out << p.epoch << "," << p.step << "," << format_double(p.loss) << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

std::pair<MotionSequence, MotionSequence> rollout(const StepPredictor& step,
                                                  MotionSequence leader_history,
                                                  MotionSequence follower_history,
                                                  int horizon_frames, int step_len) {
  if (horizon_frames < 1) throw ContractError("rollout: horizon must be >= 1");
  if (step_len < 1) throw ContractError("rollout: step length must be >= 1");

  MotionSequence leader_pred, follower_pred;
  leader_pred.fps = leader_history.fps;
  follower_pred.fps = follower_history.fps;
  while (leader_pred.frame_count() < horizon_frames) {
    auto [chunk_l, chunk_f] = step(leader_history, follower_history);
    if (chunk_l.frame_count() != step_len || chunk_f.frame_count() != step_len) {
      throw ContractError("rollout: step predictor returned the wrong frame count");
    }
    for (int f = 0; f < step_len; ++f) {
      leader_history.frames.push_back(chunk_l.frames[static_cast<size_t>(f)]);
      follower_history.frames.push_back(chunk_f.frames[static_cast<size_t>(f)]);
      leader_pred.frames.push_back(chunk_l.frames[static_cast<size_t>(f)]);
      follower_pred.frames.push_back(chunk_f.frames[static_cast<size_t>(f)]);
    }
  }
  if (leader_pred.frame_count() > horizon_frames) {
    leader_pred = leader_pred.slice(0, horizon_frames);
    follower_pred = follower_pred.slice(0, horizon_frames);
  }
  return {leader_pred, follower_pred};
}

WindowPredictor model_window_predictor(const CollabModel& model) {
  return [model](const CoupleSequence& window, int in_len, int horizon) {
    if (window.frame_count() < in_len) {
      throw InsufficientHistoryError("window shorter than the observation length");
    }
    const StepPredictor step = [&model](const MotionSequence& lead, const MotionSequence& foll) {
      return forward_collab(lead, foll, model);
    };
    return rollout(step, window.leader.slice(0, in_len), window.follower.slice(0, in_len),
                   horizon, model.config.step);
  };
}

namespace {

struct Accumulator {
  double sum = 0;
  long count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
};

std::vector<Pose> first_frames(const MotionSequence& seq, int n) {
  return {seq.frames.begin(), seq.frames.begin() + n};
}

}  // namespace

MetricsReport evaluate(const WindowPredictor& predictor,
                       const std::vector<CoupleSequence>& test_set, const Skeleton& skeleton,
                       const EvalConfig& cfg) {
  if (test_set.empty()) throw ContractError("evaluate: empty test set");

  // key: metric, role, aerial, horizon_ms
  std::map<std::tuple<std::string, std::string, std::string, int>, Accumulator> cells;
  // key: metric, role, joint (longest horizon only)
  std::map<std::tuple<std::string, std::string, int>, Accumulator> joint_cells;
  const int max_horizon_ms = kHorizonsMs.back();

  for (const CoupleSequence& seq : test_set) {
    const std::vector<CoupleSequence> windows =
        sample_test_subsequences(seq, cfg.subsequences, cfg.in_len, cfg.horizon);
    for (const CoupleSequence& raw_window : windows) {
      const CoupleSequence window = normalize_couple(raw_window, skeleton);
      auto [pred_l, pred_f] = predictor(window, cfg.in_len, cfg.horizon);
      if (pred_l.frame_count() != cfg.horizon || pred_f.frame_count() != cfg.horizon) {
        throw ContractError("evaluate: predictor returned the wrong horizon");
      }
      const MotionSequence gt_l = window.leader.slice(cfg.in_len, cfg.in_len + cfg.horizon);
      const MotionSequence gt_f = window.follower.slice(cfg.in_len, cfg.in_len + cfg.horizon);

      for (int horizon_ms : kHorizonsMs) {
        const int frames = std::min(cfg.horizon, frames_for_horizon(horizon_ms, seq.leader.fps));
        const auto pl = first_frames(pred_l, frames), pf = first_frames(pred_f, frames);
        const auto tl = first_frames(gt_l, frames), tf = first_frames(gt_f, frames);
        cells[{"JME", "leader", seq.aerial, horizon_ms}].add(mpjpe(pl, tl));
        cells[{"JME", "follower", seq.aerial, horizon_ms}].add(mpjpe(pf, tf));
        cells[{"SME", "leader", seq.aerial, horizon_ms}].add(sme_person(pl, tl, skeleton));
        cells[{"SME", "follower", seq.aerial, horizon_ms}].add(sme_person(pf, tf, skeleton));
        cells[{"AME", "leader", seq.aerial, horizon_ms}].add(ame_person(pl, tl));
        cells[{"AME", "follower", seq.aerial, horizon_ms}].add(ame_person(pf, tf));
      }
      if (cfg.per_joint) {
        const auto add_joints = [&](const char* metric, const char* role,
                                    const std::vector<double>& values) {
          for (size_t j = 0; j < values.size(); ++j) {
            joint_cells[{metric, role, static_cast<int>(j)}].add(values[j]);
          }
        };
        add_joints("JME", "leader", mpjpe_per_joint(pred_l.frames, gt_l.frames));
        add_joints("JME", "follower", mpjpe_per_joint(pred_f.frames, gt_f.frames));
        add_joints("SME", "leader", sme_person_per_joint(pred_l.frames, gt_l.frames, skeleton));
        add_joints("SME", "follower", sme_person_per_joint(pred_f.frames, gt_f.frames, skeleton));
        add_joints("AME", "leader", ame_person_per_joint(pred_l.frames, gt_l.frames));
        add_joints("AME", "follower", ame_person_per_joint(pred_f.frames, gt_f.frames));
      }
    }
  }

  std::vector<std::string> aerials;
  for (const auto& [key, acc] : cells) {
    const std::string& aerial = std::get<2>(key);
    if (std::find(aerials.begin(), aerials.end(), aerial) == aerials.end()) {
      aerials.push_back(aerial);
    }
  }
  std::sort(aerials.begin(), aerials.end());

  MetricsReport report;
  for (const char* metric : kMetricNames) {
    for (const char* role : kRoleNames) {
      for (int horizon_ms : kHorizonsMs) {
        Accumulator avg;
        for (const std::string& aerial : aerials) {
          const auto it = cells.find({metric, role, aerial, horizon_ms});
          if (it == cells.end()) continue;
          report.rows.push_back({metric, role, aerial, horizon_ms, -1, it->second.mean(),
                                 it->second.count});
          avg.sum += it->second.sum;
          avg.count += it->second.count;
        }
        report.rows.push_back({metric, role, "AVG", horizon_ms, -1, avg.mean(), avg.count});
      }
    }
  }
  if (cfg.per_joint) {
    for (const auto& [key, acc] : joint_cells) {
      report.rows.push_back({std::get<0>(key), std::get<1>(key), "AVG", max_horizon_ms,
                             std::get<2>(key), acc.mean(), acc.count});
    }
  }
  return report;
}

MetricsReport evaluate(const CollabModel& model, const std::vector<CoupleSequence>& test_set,
                       const Skeleton& skeleton, const EvalConfig& cfg) {
  return evaluate(model_window_predictor(model), test_set, skeleton, cfg);
}

}  // namespace xmotion
