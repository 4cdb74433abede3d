#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "xmotion/rng.hpp"
#include "xmotion/train.hpp"

using namespace xmotion;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.joints = 18;
  cfg.window = 5;
  cfg.step = 5;
  cfg.dct_coeffs = 6;
  cfg.d_model = 16;
  cfg.gcn_layers = 2;
  cfg.gcn_hidden = 16;
  cfg.heads_key = 8;
  cfg.heads_value = 1;
  return cfg;
}

CoupleSequence synth_labeled(std::uint64_t seed, Scenario scenario, int frames,
                             const std::string& aerial, int couple, int rep) {
  CoupleSequence seq = synthesize_couple(seed, scenario, frames);
  seq.seq_id = aerial + "-c" + std::to_string(couple) + "-r" + std::to_string(rep);
  seq.aerial = aerial;
  seq.couple = couple;
  seq.repetition = rep;
  return seq;
}

// both persons translating at constant velocity: trivially learnable motion
CoupleSequence constant_velocity_couple(int frames) {
  CoupleSequence base = synth_labeled(5, Scenario::LaggedMirror, 1, "cv", 1, 0);
  CoupleSequence seq = base;
  seq.leader.frames.clear();
  seq.follower.frames.clear();
  const Eigen::RowVector3d velocity(12.0, -6.0, 3.0);
  for (int f = 0; f < frames; ++f) {
    Pose lead = base.leader.frames[0];
    Pose foll = base.follower.frames[0];
    lead.rowwise() += velocity * f;
    foll.rowwise() += velocity * f;
    seq.leader.frames.push_back(std::move(lead));
    seq.follower.frames.push_back(std::move(foll));
  }
  return seq;
}

NamedTensors snapshot(const CollabModel& model) {
  CollabModel copy = model;
  ParamRefs refs;
  copy.collect("", refs);
  NamedTensors out;
  for (auto& [name, tensor] : refs) out.emplace_back(name, *tensor);
  return out;
}

bool identical(const NamedTensors& a, const NamedTensors& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first || a[i].second.shape() != b[i].second.shape()) return false;
    for (int k = 0; k < a[i].second.size(); ++k) {
      if (a[i].second.at(k) != b[i].second.at(k)) return false;
    }
  }
  return true;
}

Tensor to_pred_tensor(const MotionSequence& seq) {
  std::vector<double> data;
  for (const Pose& p : seq.frames) {
    for (int j = 0; j < p.rows(); ++j)
      for (int a = 0; a < 3; ++a) data.push_back(p(j, a));
  }
  return Tensor::from_data({seq.frame_count(), seq.joint_count() * 3}, std::move(data));
}

}  // namespace

TEST_CASE("couple loss") {
  const CoupleSequence seq = synth_labeled(3, Scenario::LaggedMirror, 10, "A1", 1, 0);
  const MotionSequence gt_l = seq.leader.slice(0, 5);
  const MotionSequence gt_f = seq.follower.slice(0, 5);

  SUBCASE("perfect prediction scores zero") {
    const Tensor loss = couple_loss(to_pred_tensor(gt_l), to_pred_tensor(gt_f), gt_l, gt_f);
    CHECK(loss.at(0) == 0.0);
  }
  SUBCASE("loss equals the couple metric numerically") {
    const MotionSequence off_l = seq.leader.slice(1, 6);
    const MotionSequence off_f = seq.follower.slice(2, 7);
    const Tensor loss = couple_loss(to_pred_tensor(off_l), to_pred_tensor(off_f), gt_l, gt_f);
    const double expected = jme(off_l.frames, off_f.frames, gt_l.frames, gt_f.frames);
    CHECK(loss.at(0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("gradient w.r.t. predictions matches finite differences") {
    const Tensor pred = to_pred_tensor(seq.leader.slice(1, 6));
    const auto f = [&](const Tensor& x) { return person_loss(x, gt_l); };
    CHECK(grad_check(f, pred, 1e-4) < 1e-5);
  }
  SUBCASE("shape mismatch rejected") {
    CHECK_THROWS_AS(person_loss(to_pred_tensor(gt_l), gt_f.slice(0, 4)), DimensionError);
  }
}

TEST_CASE("training") {
  const ModelConfig cfg = small_config();
  const Skeleton skel = Skeleton::mocap18();
  std::vector<CoupleSequence> data;
  data.push_back(synth_labeled(21, Scenario::LaggedMirror, 90, "A1", 2, 0));

  TrainConfig tc;
  tc.in_len = 20;
  tc.sample_stride = 5;
  tc.batch_size = 4;
  tc.seed = 9;

  SUBCASE("zero epochs leave the model bit-identical") {
    CollabModel model = make_variant(VariantKind::Xia, cfg, 11);
    const NamedTensors before = snapshot(model);
    tc.epochs = 0;
    train(model, data, tc, skel);
    CHECK(identical(before, snapshot(model)));
  }
  SUBCASE("training is deterministic under a fixed seed") {
    tc.epochs = 2;
    CollabModel a = make_variant(VariantKind::Xia, cfg, 11);
    CollabModel b = make_variant(VariantKind::Xia, cfg, 11);
    const TrainResult ra = train(a, data, tc, skel);
    const TrainResult rb = train(b, data, tc, skel);
    CHECK(identical(snapshot(a), snapshot(b)));
    REQUIRE(ra.curve.size() == rb.curve.size());
    for (size_t i = 0; i < ra.curve.size(); ++i) CHECK(ra.curve[i].loss == rb.curve[i].loss);
  }
  SUBCASE("a short run at least halves the loss") {
    tc.epochs = 14;  // about 200 steps at 14 samples / batch 4
    CollabModel model = make_variant(VariantKind::Xia, cfg, 11);
    const TrainResult result = train(model, data, tc, skel);
    REQUIRE(result.curve.size() > 20);
    CHECK(result.curve.back().loss < 0.5 * result.curve.front().loss);
  }
  SUBCASE("training beats the frozen-pose baseline on constant-velocity motion") {
    std::vector<CoupleSequence> cv_data;
    cv_data.push_back(constant_velocity_couple(80));
    tc.epochs = 16;
    CollabModel model = make_variant(VariantKind::BaseIndependent, cfg, 13);
    train(model, cv_data, tc, skel);

    const CoupleSequence normalized = normalize_couple(cv_data[0], skel);
    const MotionSequence hist_l = normalized.leader.slice(40, 60);
    const MotionSequence hist_f = normalized.follower.slice(40, 60);
    const MotionSequence gt_l = normalized.leader.slice(60, 65);
    const auto [pred_l, pred_f] = forward_collab(hist_l, hist_f, model);

    std::vector<Pose> frozen(5, hist_l.frames.back());
    const double model_error = mpjpe(pred_l.frames, gt_l.frames);
    const double frozen_error = mpjpe(frozen, gt_l.frames);
    CHECK(model_error < frozen_error);
  }
  SUBCASE("empty training set rejected") {
    CollabModel model = make_variant(VariantKind::Xia, cfg, 11);
    std::vector<CoupleSequence> empty;
    CHECK_THROWS_AS(train(model, empty, tc, skel), ContractError);
  }
  SUBCASE("loss curve file format") {
    const std::string path = (std::filesystem::temp_directory_path() / "xm_curve.csv").string();
    save_loss_curve(path, {{0, 0, 3.5}, {0, 1, 2.25}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,step,loss");
    std::getline(in, line);
    CHECK(line == "0,0,3.5");
    std::filesystem::remove(path);
  }
}

TEST_CASE("rollout") {
  const int joints = 3;
  MotionSequence history;
  history.fps = 25.0;
  for (int f = 0; f < 6; ++f) history.frames.push_back(Pose::Constant(joints, 3, f));

  SUBCASE("call count and truncation") {
    int calls = 0;
    const StepPredictor counter = [&](const MotionSequence& lead, const MotionSequence&) {
      ++calls;
      MotionSequence chunk;
      chunk.fps = lead.fps;
      for (int k = 0; k < 10; ++k) chunk.frames.push_back(lead.frames.back());
      return std::make_pair(chunk, chunk);
    };
    MotionSequence long_hist;
    long_hist.fps = 25.0;
    for (int f = 0; f < 50; ++f) long_hist.frames.push_back(Pose::Constant(joints, 3, f));
    const auto [lead, foll] = rollout(counter, long_hist, long_hist, 25, 10);
    CHECK(calls == 3);  // 1000 ms at T = 10 frames
    CHECK(lead.frame_count() == 25);
    CHECK(foll.frame_count() == 25);
  }
  SUBCASE("horizon equal to the step is a single forward pass") {
    int calls = 0;
    const StepPredictor counter = [&](const MotionSequence& lead, const MotionSequence&) {
      ++calls;
      MotionSequence chunk;
      chunk.fps = lead.fps;
      for (int k = 0; k < 2; ++k) chunk.frames.push_back(lead.frames.back());
      return std::make_pair(chunk, chunk);
    };
    rollout(counter, history, history, 2, 2);
    CHECK(calls == 1);
  }
  SUBCASE("prefix consistency: longer rollouts extend shorter ones exactly") {
    // each predicted frame adds a fixed increment, so content depends on the
    // history the predictor saw
    const StepPredictor stepper = [](const MotionSequence& lead, const MotionSequence& foll) {
      MotionSequence cl, cf;
      cl.fps = lead.fps;
      cf.fps = foll.fps;
      for (int k = 0; k < 3; ++k) {
        cl.frames.push_back(lead.frames.back() + Pose::Constant(3, 3, k + 1.0));
        cf.frames.push_back(foll.frames.back() - Pose::Constant(3, 3, k + 1.0));
      }
      return std::make_pair(cl, cf);
    };
    const auto [short_l, short_f] = rollout(stepper, history, history, 4, 3);
    const auto [long_l, long_f] = rollout(stepper, history, history, 11, 3);
    for (int f = 0; f < 4; ++f) {
      CHECK((short_l.frames[static_cast<size_t>(f)].array() ==
             long_l.frames[static_cast<size_t>(f)].array())
                .all());
      CHECK((short_f.frames[static_cast<size_t>(f)].array() ==
             long_f.frames[static_cast<size_t>(f)].array())
                .all());
    }
  }
  SUBCASE("a frozen-pose predictor freezes the whole horizon") {
    const StepPredictor frozen = [](const MotionSequence& lead, const MotionSequence& foll) {
      MotionSequence cl, cf;
      cl.fps = lead.fps;
      cf.fps = foll.fps;
      for (int k = 0; k < 2; ++k) {
        cl.frames.push_back(lead.frames.back());
        cf.frames.push_back(foll.frames.back());
      }
      return std::make_pair(cl, cf);
    };
    const auto [lead, foll] = rollout(frozen, history, history, 9, 2);
    for (const Pose& p : lead.frames) CHECK((p.array() == history.frames.back().array()).all());
  }
  SUBCASE("bad horizon rejected") {
    const StepPredictor noop = [](const MotionSequence& l, const MotionSequence& f) {
      return std::make_pair(l, f);
    };
    CHECK_THROWS_AS(rollout(noop, history, history, 0, 2), ContractError);
  }
}

TEST_CASE("evaluation") {
  const Skeleton skel = Skeleton::mocap18();
  std::vector<CoupleSequence> test_set;
  test_set.push_back(synth_labeled(41, Scenario::LaggedMirror, 60, "A1", 1, 0));
  test_set.push_back(synth_labeled(42, Scenario::OrbitLift, 60, "A2", 1, 0));

  EvalConfig ec;
  ec.in_len = 20;
  ec.horizon = 5;
  ec.subsequences = 8;

  const WindowPredictor ground_truth = [&](const CoupleSequence& window, int in_len,
                                           int horizon) {
    return std::make_pair(window.leader.slice(in_len, in_len + horizon),
                          window.follower.slice(in_len, in_len + horizon));
  };

  SUBCASE("the ground-truth predictor scores zero everywhere") {
    const MetricsReport report = evaluate(ground_truth, test_set, skel, ec);
    for (const auto& row : report.rows) CHECK(row.value_mm < 1e-9);
  }
  SUBCASE("report structure: metrics x roles x horizons x (aerials + AVG)") {
    const MetricsReport report = evaluate(ground_truth, test_set, skel, ec);
    CHECK(report.rows.size() == 3 * 2 * 4 * (2 + 1));
    for (const char* metric : kMetricNames) {
      for (const char* role : kRoleNames) {
        for (int horizon : kHorizonsMs) {
          CHECK(report.find(metric, role, "A1", horizon) != nullptr);
          CHECK(report.find(metric, role, "A2", horizon) != nullptr);
          CHECK(report.find(metric, role, "AVG", horizon) != nullptr);
        }
      }
    }
  }
  SUBCASE("the AVG cell is the sample-weighted mean of the aerial cells") {
    // an asymmetric predictor so cells differ: shift everything by 10 mm
    const WindowPredictor shifted = [&](const CoupleSequence& window, int in_len, int horizon) {
      auto [lead, foll] = ground_truth(window, in_len, horizon);
      for (Pose& p : lead.frames) p.array() += 10.0;
      return std::make_pair(lead, foll);
    };
    // make the second sequence shorter so its window count differs
    std::vector<CoupleSequence> uneven = test_set;
    uneven[1].leader = uneven[1].leader.slice(0, 25);
    uneven[1].follower = uneven[1].follower.slice(0, 25);
    const MetricsReport report = evaluate(shifted, uneven, skel, ec);
    for (const char* metric : kMetricNames) {
      const auto* a1 = report.find(metric, "leader", "A1", 1000);
      const auto* a2 = report.find(metric, "leader", "A2", 1000);
      const auto* avg = report.find(metric, "leader", "AVG", 1000);
      REQUIRE(a1 != nullptr);
      REQUIRE(a2 != nullptr);
      REQUIRE(avg != nullptr);
      CHECK(a1->sample_count != a2->sample_count);
      const double expected = (a1->value_mm * a1->sample_count + a2->value_mm * a2->sample_count) /
                              static_cast<double>(a1->sample_count + a2->sample_count);
      CHECK(avg->value_mm == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("a real model runs end to end and reports finite errors") {
    ModelConfig cfg = small_config();
    const CollabModel model = make_variant(VariantKind::Xia, cfg, 3);
    const MetricsReport report = evaluate(model, test_set, skel, ec);
    for (const auto& row : report.rows) {
      CHECK(std::isfinite(row.value_mm));
      CHECK(row.value_mm >= 0.0);
    }
  }
  SUBCASE("metrics are invariant to a global rigid placement of the raw data") {
    ModelConfig cfg = small_config();
    const CollabModel model = make_variant(VariantKind::Xia, cfg, 3);
    const MetricsReport base = evaluate(model, test_set, skel, ec);

    RigidTransform placement;
    placement.rotation =
        Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    placement.translation = Eigen::Vector3d(3000, -1200, 500);
    std::vector<CoupleSequence> moved = test_set;
    for (CoupleSequence& seq : moved) {
      for (int f = 0; f < seq.frame_count(); ++f) {
        seq.leader.frames[static_cast<size_t>(f)] =
            apply_transform(placement, seq.leader.frames[static_cast<size_t>(f)]);
        seq.follower.frames[static_cast<size_t>(f)] =
            apply_transform(placement, seq.follower.frames[static_cast<size_t>(f)]);
      }
    }
    const MetricsReport transformed = evaluate(model, moved, skel, ec);
    REQUIRE(base.rows.size() == transformed.rows.size());
    for (size_t i = 0; i < base.rows.size(); ++i) {
      CHECK(std::abs(base.rows[i].value_mm - transformed.rows[i].value_mm) < 1e-6);
    }
  }
  SUBCASE("per-joint rows appear only when requested") {
    const MetricsReport plain = evaluate(ground_truth, test_set, skel, ec);
    for (const auto& row : plain.rows) CHECK(row.joint == -1);
    EvalConfig with_joints = ec;
    with_joints.per_joint = true;
    const MetricsReport detailed = evaluate(ground_truth, test_set, skel, with_joints);
    int joint_rows = 0;
    for (const auto& row : detailed.rows) {
      if (row.joint >= 0) ++joint_rows;
    }
    CHECK(joint_rows == 3 * 2 * 18);
  }
}
