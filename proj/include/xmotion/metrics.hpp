#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "xmotion/geometry.hpp"
#include "xmotion/motion.hpp"

namespace xmotion {

// --- per-person primitives (frame spans of equal length) ---

// Mean over (t, j) of the Euclidean joint distance, millimetres.
double mpjpe(const std::vector<Pose>& pred, const std::vector<Pose>& gt);
std::vector<double> mpjpe_per_joint(const std::vector<Pose>& pred, const std::vector<Pose>& gt);

// MPJPE after re-normalizing both poses per-frame by their own
// normalization transform, erasing where the person stands.
double sme_person(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                  const Skeleton& skeleton);
std::vector<double> sme_person_per_joint(const std::vector<Pose>& pred,
                                         const std::vector<Pose>& gt, const Skeleton& skeleton);

// MPJPE after the best per-frame rigid alignment of prediction onto truth.
double ame_person(const std::vector<Pose>& pred, const std::vector<Pose>& gt);
std::vector<double> ame_person_per_joint(const std::vector<Pose>& pred,
                                         const std::vector<Pose>& gt);

// --- couple-level metrics: the average of the two per-person values ---
double jme(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f);
double sme(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f,
           const Skeleton& skeleton);
double ame(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f);

// --- aggregated report ---

inline constexpr std::array<int, 4> kHorizonsMs{80, 400, 720, 1000};
inline constexpr std::array<const char*, 3> kMetricNames{"JME", "SME", "AME"};
inline constexpr std::array<const char*, 2> kRoleNames{"leader", "follower"};

// Number of predicted frames an evaluation horizon covers, e.g. 80 ms at
// 25 FPS is 2 frames.
int frames_for_horizon(int horizon_ms, double fps);

struct MetricsReport {
  struct Row {
    std::string metric;  // JME | SME | AME
    std::string role;    // leader | follower
    std::string aerial;  // aerial label or "AVG"
    int horizon_ms = 0;
    int joint = -1;  // -1: aggregate over joints
    double value_mm = 0.0;
    long sample_count = 0;
  };
  std::vector<Row> rows;

  const Row* find(const std::string& metric, const std::string& role, const std::string& aerial,
                  int horizon_ms, int joint = -1) const;
  double value(const std::string& metric, const std::string& role, const std::string& aerial,
               int horizon_ms) const;  // throws if missing

  void write_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
  static MetricsReport load_csv(const std::string& path);

  // Aligned text table per metric: per-aerial columns plus AVG,
  // leader/follower rows, values at the longest horizon.
  std::string to_table() const;
};

}  // namespace xmotion
