#include "xmotion/geometry.hpp"

#include <cmath>
#include <fstream>

namespace xmotion {

namespace {

// Anchors count as collinear when the triangle they span has area below this
// (mm^2), matching the degeneracy tolerance used throughout.
constexpr double kCollinearAreaTol = 1e-6;

}  // namespace

int Skeleton::index_of(const std::string& name) const {
  for (int i = 0; i < joint_count(); ++i) {
    if (joint_names[static_cast<size_t>(i)] == name) return i;
  }
  return -1;
}

void Skeleton::validate() const {
  if (joint_count() < 4) throw ContractError("skeleton needs at least 4 joints");
  auto in_range = [&](int i) { return i >= 0 && i < joint_count(); };
  if (!in_range(left_hip) || !in_range(right_hip) || !in_range(neck)) {
    throw ContractError("skeleton is missing a normalization anchor (hips, neck)");
  }
  if (left_hip == right_hip) throw ContractError("skeleton hip indices coincide");
}

Skeleton Skeleton::mocap18() {
  Skeleton s;
  s.joint_names = {"head-top",    "head-left",   "head-right", "neck",       "left-shoulder",
                   "right-shoulder", "left-elbow", "right-elbow", "left-wrist", "right-wrist",
                   "left-hip",    "right-hip",   "left-knee",  "right-knee", "left-heel",
                   "right-heel",  "left-toes",   "right-toes"};
  s.neck = 3;
  s.left_hip = 10;
  s.right_hip = 11;
  return s;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
  RigidTransform out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  const Eigen::Matrix3d delta = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return delta.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

void Camera::validate() const {
  if (intrinsics(0, 0) <= 0 || intrinsics(1, 1) <= 0) {
    throw ContractError("camera intrinsics need positive focal lengths");
  }
  if (std::abs(intrinsics(1, 0)) > 1e-12 || std::abs(intrinsics(2, 0)) > 1e-12 ||
      std::abs(intrinsics(2, 1)) > 1e-12) {
    throw ContractError("camera intrinsics must be upper-triangular");
  }
}

RigidTransform normalization_transform(const Pose& pose, const Skeleton& skeleton) {
  skeleton.validate();
  if (pose.rows() != skeleton.joint_count()) {
    throw DimensionError("pose joint count does not match skeleton");
  }
  const Eigen::Vector3d lhip = pose.row(skeleton.left_hip);
  const Eigen::Vector3d rhip = pose.row(skeleton.right_hip);
  const Eigen::Vector3d neck = pose.row(skeleton.neck);
  const Eigen::Vector3d center = 0.5 * (lhip + rhip);

  const Eigen::Vector3d hip_dir = lhip - center;
  const double hip_len = hip_dir.norm();
  if (hip_len < 1e-12) throw DegeneracyError("coincident hips: x-axis undefined");

  const Eigen::Vector3d to_neck = neck - center;
  const double area = 0.5 * hip_dir.cross(to_neck).norm();
  if (area < kCollinearAreaTol) {
    throw DegeneracyError("hip-center, left hip and neck are collinear: XOZ plane undefined");
  }

  const Eigen::Vector3d x_axis = hip_dir / hip_len;
  Eigen::Vector3d z_axis = to_neck - to_neck.dot(x_axis) * x_axis;
  z_axis.normalize();  // neck lands in XOZ with positive z
  const Eigen::Vector3d y_axis = z_axis.cross(x_axis);

  RigidTransform t;
  t.rotation.row(0) = x_axis;
  t.rotation.row(1) = y_axis;
  t.rotation.row(2) = z_axis;
  t.translation = -(t.rotation * center);
  return t;
}

Pose apply_transform(const RigidTransform& t, const Pose& pose) {
  Pose out(pose.rows(), 3);
  for (Eigen::Index i = 0; i < pose.rows(); ++i) {
    out.row(i) = t.apply(pose.row(i).transpose()).transpose();
  }
  return out;
}

Pose procrustes_align(const Pose& pred, const Pose& gt) {
  if (pred.rows() != gt.rows()) throw DimensionError("procrustes: joint counts differ");
  if (pred.rows() < 1) throw ContractError("procrustes: empty pose");

  const Eigen::RowVector3d pred_centroid = pred.colwise().mean();
  const Eigen::RowVector3d gt_centroid = gt.colwise().mean();
  const Pose pred_c = pred.rowwise() - pred_centroid;
  const Pose gt_c = gt.rowwise() - gt_centroid;

  if (gt_c.rowwise().norm().maxCoeff() < 1e-12) {
    throw DegeneracyError("procrustes: ground-truth joints all coincide");
  }

  const Eigen::Matrix3d cov = pred_c.transpose() * gt_c;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rotation = svd.matrixV() * d * svd.matrixU().transpose();

  RigidTransform t;
  t.rotation = rotation;
  t.translation = gt_centroid.transpose() - rotation * pred_centroid.transpose();
  return apply_transform(t, pred);
}

Ray backproject(const Camera& cam, const Eigen::Vector2d& pixel) {
  cam.validate();
  Ray ray;
  ray.origin = -(cam.rotation.transpose() * cam.translation);  // camera center
  const Eigen::Vector3d pixel_h(pixel.x(), pixel.y(), 1.0);
  const Eigen::Vector3d dir_cam = cam.intrinsics.inverse() * pixel_h;
  ray.direction = (cam.rotation.transpose() * dir_cam).normalized();
  return ray;
}

Eigen::Vector2d project(const Camera& cam, const Eigen::Vector3d& point) {
  const Eigen::Vector3d p_cam = cam.rotation * point + cam.translation;
  if (std::abs(p_cam.z()) < 1e-12) throw DegeneracyError("project: point on the camera plane");
  const Eigen::Vector3d h = cam.intrinsics * p_cam;
  return {h.x() / h.z(), h.y() / h.z()};
}

Eigen::Vector3d triangulate_two_rays(const Ray& a, const Ray& b) {
  const Eigen::Vector3d da = a.direction.normalized();
  const Eigen::Vector3d db = b.direction.normalized();
  if (std::abs(da.dot(db)) >= 1.0 - 1e-9) {
    throw DegeneracyError("triangulate: parallel rays have no unique nearest point");
  }
  // Sum of squared line distances is quadratic: (2I - da da^T - db db^T) p = rhs.
  const Eigen::Matrix3d pa = Eigen::Matrix3d::Identity() - da * da.transpose();
  const Eigen::Matrix3d pb = Eigen::Matrix3d::Identity() - db * db.transpose();
  const Eigen::Matrix3d lhs = pa + pb;
  const Eigen::Vector3d rhs = pa * a.origin + pb * b.origin;
  return lhs.ldlt().solve(rhs);
}

std::vector<Camera> load_cameras(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open camera file " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ParseError("camera file contains a non-numeric token: " + path);
  if (values.empty() || values.size() % 21 != 0) {
    throw ParseError("camera file must hold 21 values per camera: " + path);
  }

  std::vector<Camera> cams;
  for (size_t base = 0; base < values.size(); base += 21) {
    Camera c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c.intrinsics(i, j) = values[base + static_cast<size_t>(3 * i + j)];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        c.rotation(i, j) = values[base + 9 + static_cast<size_t>(3 * i + j)];
    for (int i = 0; i < 3; ++i) c.translation(i) = values[base + 18 + static_cast<size_t>(i)];
    c.validate();
    cams.push_back(c);
  }
  return cams;
}

}  // namespace xmotion
