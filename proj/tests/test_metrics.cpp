#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "xmotion/metrics.hpp"
#include "xmotion/rng.hpp"

using namespace xmotion;

namespace {

Skeleton tiny_skeleton() {
  Skeleton s;
  s.joint_names = {"left-hip", "right-hip", "neck", "extra"};
  s.left_hip = 0;
  s.right_hip = 1;
  s.neck = 2;
  return s;
}

Pose generic_pose(std::mt19937_64& rng) {
  Pose p(4, 3);
  p << 110 + uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -20, 20),
      -110 + uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -20, 20),
      uniform(rng, -30, 30), uniform(rng, -30, 30), 450 + uniform(rng, -30, 30),
      uniform(rng, -200, 200), uniform(rng, -200, 200), uniform(rng, -200, 200);
  return p;
}

std::vector<Pose> generic_span(int frames, std::mt19937_64& rng) {
  std::vector<Pose> poses;
  for (int f = 0; f < frames; ++f) poses.push_back(generic_pose(rng));
  return poses;
}

RigidTransform random_rigid(std::mt19937_64& rng) {
  const Eigen::Vector3d axis =
      Eigen::Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(uniform(rng, -M_PI, M_PI), axis).toRotationMatrix();
  t.translation =
      Eigen::Vector3d(uniform(rng, -400, 400), uniform(rng, -400, 400), uniform(rng, -400, 400));
  return t;
}

std::vector<Pose> transform_span(const std::vector<Pose>& poses, const RigidTransform& t) {
  std::vector<Pose> out;
  for (const Pose& p : poses) out.push_back(apply_transform(t, p));
  return out;
}

// independent of the metrics module: canonicalize a pose with raw vector math
Pose reference_normalize(const Pose& pose) {
  const Eigen::Vector3d lhip = pose.row(0), rhip = pose.row(1), neck = pose.row(2);
  const Eigen::Vector3d center = 0.5 * (lhip + rhip);
  const Eigen::Vector3d x = (lhip - center).normalized();
  Eigen::Vector3d z = (neck - center) - (neck - center).dot(x) * x;
  z.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Pose out(pose.rows(), 3);
  for (Eigen::Index j = 0; j < pose.rows(); ++j) {
    const Eigen::Vector3d d = pose.row(j).transpose() - center;
    out(j, 0) = d.dot(x);
    out(j, 1) = d.dot(y);
    out(j, 2) = d.dot(z);
  }
  return out;
}

}  // namespace

TEST_CASE("mpjpe") {
  std::mt19937_64 rng(3);
  const std::vector<Pose> gt = generic_span(5, rng);

  SUBCASE("perfect prediction scores zero") { CHECK(mpjpe(gt, gt) == 0.0); }
  SUBCASE("hand value: every joint off by a 3-4-0 offset") {
    std::vector<Pose> zeros(4, Pose::Zero(6, 3));
    std::vector<Pose> pred(4, Pose::Zero(6, 3));
    for (Pose& p : pred) {
      p.col(0).setConstant(3.0);
      p.col(1).setConstant(4.0);
    }
    CHECK(mpjpe(pred, zeros) == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("duplicating every frame leaves the mean unchanged") {
    std::vector<Pose> pred = generic_span(5, rng);
    std::vector<Pose> pred2, gt2;
    for (size_t i = 0; i < pred.size(); ++i) {
      pred2.push_back(pred[i]);
      pred2.push_back(pred[i]);
      gt2.push_back(gt[i]);
      gt2.push_back(gt[i]);
    }
    CHECK(mpjpe(pred, gt) == doctest::Approx(mpjpe(pred2, gt2)).epsilon(1e-12));
  }
  SUBCASE("shape mismatch rejected") {
    std::vector<Pose> shorter(gt.begin(), gt.begin() + 3);
    CHECK_THROWS_AS(mpjpe(shorter, gt), ContractError);
  }
}

TEST_CASE("jme") {
  std::mt19937_64 rng(5);
  const std::vector<Pose> gt_l = generic_span(6, rng);
  const std::vector<Pose> gt_f = generic_span(6, rng);

  SUBCASE("perfect predictions score zero") { CHECK(jme(gt_l, gt_f, gt_l, gt_f) == 0.0); }
  SUBCASE("jme is the mean of the per-person errors") {
    const std::vector<Pose> pred_l = generic_span(6, rng);
    const std::vector<Pose> pred_f = generic_span(6, rng);
    const double expected = 0.5 * (mpjpe(pred_l, gt_l) + mpjpe(pred_f, gt_f));
    CHECK(jme(pred_l, pred_f, gt_l, gt_f) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("translating one perfect person by d gives exactly d/2") {
    RigidTransform shift;
    shift.translation = Eigen::Vector3d(6, 8, 0);  // magnitude 10
    const std::vector<Pose> pred_f = transform_span(gt_f, shift);
    CHECK(jme(gt_l, pred_f, gt_l, gt_f) == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("sme") {
  std::mt19937_64 rng(7);
  const Skeleton skel = tiny_skeleton();
  const std::vector<Pose> gt_l = generic_span(5, rng);
  const std::vector<Pose> gt_f = generic_span(5, rng);

  SUBCASE("perfect predictions score zero") {
    CHECK(sme(gt_l, gt_f, gt_l, gt_f, skel) < 1e-12);
  }
  SUBCASE("rigidly displacing a person erases that person's term") {
    const std::vector<Pose> pred_f = transform_span(gt_f, random_rigid(rng));
    CHECK(sme_person(pred_f, gt_f, skel) < 1e-9);
  }
  SUBCASE("matches an independent reimplementation") {
    const std::vector<Pose> pred_l = generic_span(5, rng);
    const std::vector<Pose> pred_f = generic_span(5, rng);
    const double ours = sme(pred_l, pred_f, gt_l, gt_f, skel);

    double total = 0;
    for (size_t t = 0; t < gt_l.size(); ++t) {
      for (int j = 0; j < 4; ++j) {
        total +=
            (reference_normalize(pred_l[t]).row(j) - reference_normalize(gt_l[t]).row(j)).norm();
        total +=
            (reference_normalize(pred_f[t]).row(j) - reference_normalize(gt_f[t]).row(j)).norm();
      }
    }
    const double expected = total / (2.0 * 5 * 4);
    CHECK(ours == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("ame") {
  std::mt19937_64 rng(9);
  const std::vector<Pose> gt_l = generic_span(5, rng);
  const std::vector<Pose> gt_f = generic_span(5, rng);

  SUBCASE("perfect predictions score zero") { CHECK(ame(gt_l, gt_f, gt_l, gt_f) < 1e-12); }
  SUBCASE("rigidly transformed truth aligns back to zero") {
    const std::vector<Pose> pred_f = transform_span(gt_f, random_rigid(rng));
    CHECK(ame_person(pred_f, gt_f) < 1e-9);
  }
  SUBCASE("per-frame aligned squared error never exceeds the unaligned one") {
    for (int trial = 0; trial < 20; ++trial) {
      const Pose gt = generic_pose(rng);
      Pose noisy = generic_pose(rng);
      const Pose aligned = procrustes_align(noisy, gt);
      CHECK((aligned - gt).squaredNorm() <= (noisy - gt).squaredNorm() + 1e-9);
    }
  }
}

TEST_CASE("SME and AME are invariant to per-frame rigid prediction transforms") {
  std::mt19937_64 rng(11);
  const Skeleton skel = tiny_skeleton();
  const std::vector<Pose> gt_l = generic_span(4, rng);
  const std::vector<Pose> gt_f = generic_span(4, rng);
  const std::vector<Pose> pred_l = generic_span(4, rng);
  const std::vector<Pose> pred_f = generic_span(4, rng);

  const double sme_base = sme(pred_l, pred_f, gt_l, gt_f, skel);
  const double ame_base = ame(pred_l, pred_f, gt_l, gt_f);

  // a different rigid motion on every frame of both predictions
  std::vector<Pose> moved_l, moved_f;
  for (size_t t = 0; t < pred_l.size(); ++t) {
    moved_l.push_back(apply_transform(random_rigid(rng), pred_l[t]));
    moved_f.push_back(apply_transform(random_rigid(rng), pred_f[t]));
  }
  CHECK(std::abs(sme(moved_l, moved_f, gt_l, gt_f, skel) - sme_base) < 1e-9);
  CHECK(std::abs(ame(moved_l, moved_f, gt_l, gt_f) - ame_base) < 1e-9);

  // JME is not invariant: it must see the displacement
  CHECK(std::abs(jme(moved_l, moved_f, gt_l, gt_f) - jme(pred_l, pred_f, gt_l, gt_f)) > 1.0);
}

TEST_CASE("horizon to frame mapping") {
  CHECK(frames_for_horizon(80, 25.0) == 2);
  CHECK(frames_for_horizon(400, 25.0) == 10);
  CHECK(frames_for_horizon(720, 25.0) == 18);
  CHECK(frames_for_horizon(1000, 25.0) == 25);
  CHECK(frames_for_horizon(1000, 50.0) == 50);
  CHECK_THROWS_AS(frames_for_horizon(1, 25.0), ContractError);
}

TEST_CASE("metrics report round trip and table") {
  MetricsReport report;
  for (const char* metric : kMetricNames) {
    for (const char* role : kRoleNames) {
      for (int horizon : kHorizonsMs) {
        report.rows.push_back({metric, role, "A1", horizon, -1, 10.0 + horizon * 0.01, 64});
        report.rows.push_back({metric, role, "AVG", horizon, -1, 11.0 + horizon * 0.01, 64});
      }
    }
  }
  report.rows.push_back({"JME", "leader", "AVG", 1000, 3, 42.5, 64});

  const std::string path = (std::filesystem::temp_directory_path() / "xm_report.csv").string();
  report.save_csv(path);
  const MetricsReport loaded = MetricsReport::load_csv(path);
  REQUIRE(loaded.rows.size() == report.rows.size());
  for (size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(loaded.rows[i].metric == report.rows[i].metric);
    CHECK(loaded.rows[i].aerial == report.rows[i].aerial);
    CHECK(loaded.rows[i].horizon_ms == report.rows[i].horizon_ms);
    CHECK(loaded.rows[i].joint == report.rows[i].joint);
    CHECK(loaded.rows[i].value_mm == report.rows[i].value_mm);
  }
  std::filesystem::remove(path);

  const std::string table = report.to_table();
  CHECK(table.find("JME") != std::string::npos);
  CHECK(table.find("AVG") != std::string::npos);
  CHECK(table.find("follower") != std::string::npos);

  CHECK(report.value("SME", "leader", "A1", 400) == doctest::Approx(14.0));
  CHECK(report.find("SME", "leader", "missing", 400) == nullptr);
}
