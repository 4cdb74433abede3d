#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "xmotion/errors.hpp"

namespace xmotion {

// One person's joints at one instant, millimetres, one row per joint.
using Pose = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Joint-name map for a skeleton; anchor indices are the joints the couple
// normalization needs. 18-joint mocap layout by default, but any skeleton
// with at least 4 joints works as long as the anchors exist.
struct Skeleton {
  std::vector<std::string> joint_names;
  int left_hip = -1;
  int right_hip = -1;
  int neck = -1;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int index_of(const std::string& name) const;
  void validate() const;  // anchors present, J >= 4

  // 18 joints: 3 head markers, neck, then left/right shoulders, elbows,
  // wrists, hips, knees, heels, toes.
  static Skeleton mocap18();
};

// Rotation + translation acting on 3D points as x -> R x + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  RigidTransform compose(const RigidTransform& inner) const;  // this after inner
  bool is_valid(double tol = 1e-9) const;                     // orthonormal, det +1
  static RigidTransform identity() { return {}; }
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit length
};

// Pinhole camera: x_cam = R x_world + t, pixel = project(K x_cam).
struct Camera {
  Eigen::Matrix3d intrinsics;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;

  void validate() const;  // K upper-triangular with positive focals
};

// Transform that moves `pose` into the canonical frame: hip-center at the
// origin, hip-center->left-hip along +x, neck in the XOZ plane with z > 0.
RigidTransform normalization_transform(const Pose& pose, const Skeleton& skeleton);

Pose apply_transform(const RigidTransform& t, const Pose& pose);

// Rigid alignment (rotation + translation, no scaling) of `pred` onto `gt`
// minimizing the sum of squared joint distances.
Pose procrustes_align(const Pose& pred, const Pose& gt);

// World-space ray through a pixel; originates at the camera center.
Ray backproject(const Camera& cam, const Eigen::Vector2d& pixel);

Eigen::Vector2d project(const Camera& cam, const Eigen::Vector3d& point);

// The point minimizing the summed squared distance to both lines (midpoint
// of the common perpendicular). Throws DegeneracyError for parallel rays.
Eigen::Vector3d triangulate_two_rays(const Ray& a, const Ray& b);

// Cameras from a plain-text file: per camera, 9 intrinsic values, 9 rotation
// values and 3 translation values, whitespace-separated.
std::vector<Camera> load_cameras(const std::string& path);

}  // namespace xmotion
