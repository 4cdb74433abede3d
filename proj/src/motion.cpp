#include "xmotion/motion.hpp"

#include <cmath>

namespace xmotion {

void MotionSequence::validate() const {
  if (frames.empty()) throw ContractError("motion sequence has no frames");
  const Eigen::Index joints = frames[0].rows();
  for (const Pose& p : frames) {
    if (p.rows() != joints) throw DimensionError("joint count changes across frames");
    if (!p.allFinite()) throw NumericError("non-finite joint coordinate in sequence");
  }
}

MotionSequence MotionSequence::slice(int begin, int end) const {
  if (begin < 0 || end > frame_count() || begin >= end) {
    throw ContractError("slice: bad frame range");
  }
  MotionSequence out;
  out.fps = fps;
  out.frames.assign(frames.begin() + begin, frames.begin() + end);
  return out;
}

SubSequenceBank extract_windows(const MotionSequence& seq, int m, int t) {
  if (m < 1 || t < 1) throw ContractError("extract_windows: M and T must be positive");
  const int f_in = seq.frame_count();
  if (f_in < m + t) {
    throw InsufficientHistoryError("extract_windows: need at least M+T observed frames");
  }
  SubSequenceBank bank;
  const int n = f_in - m - t + 1;
  bank.key_windows.reserve(static_cast<size_t>(n));
  bank.value_windows.reserve(static_cast<size_t>(n));
  for (int start = 0; start < n; ++start) {
    bank.key_windows.push_back(seq.slice(start, start + m));
    bank.value_windows.push_back(seq.slice(start, start + m + t));
    bank.start_frames.push_back(start);
  }
  bank.query_window = seq.slice(f_in - m, f_in);
  return bank;
}

Eigen::MatrixXd dct_basis(int length) {
  Eigen::MatrixXd basis(length, length);
  const double norm0 = std::sqrt(1.0 / length);
  const double norm = std::sqrt(2.0 / length);
  for (int k = 0; k < length; ++k) {
    for (int n = 0; n < length; ++n) {
      basis(k, n) = (k == 0 ? norm0 : norm) *
                    std::cos(M_PI * (2.0 * n + 1.0) * k / (2.0 * length));
    }
  }
  return basis;
}

std::vector<double> dct(const std::vector<double>& trajectory, int coeff_count) {
  const int length = static_cast<int>(trajectory.size());
  if (length < 1) throw ContractError("dct: empty trajectory");
  if (coeff_count < 1 || coeff_count > length) {
    throw ContractError("dct: coefficient count must be in [1, length]");
  }
  const Eigen::MatrixXd basis = dct_basis(length);
  const Eigen::Map<const Eigen::VectorXd> x(trajectory.data(), length);
  const Eigen::VectorXd coeffs = basis.topRows(coeff_count) * x;
  return {coeffs.data(), coeffs.data() + coeff_count};
}

std::vector<double> idct(const std::vector<double>& coeffs, int length) {
  const int coeff_count = static_cast<int>(coeffs.size());
  if (length < 1 || coeff_count > length) {
    throw ContractError("idct: need coefficient count <= length");
  }
  const Eigen::MatrixXd basis = dct_basis(length);
  const Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), coeff_count);
  const Eigen::VectorXd x = basis.topRows(coeff_count).transpose() * c;
  return {x.data(), x.data() + length};
}

DctCoeffs pad_and_encode_value(const MotionSequence& window, int expected_length,
                               int coeff_count) {
  if (window.frame_count() != expected_length) {
    throw ContractError("pad_and_encode_value: window length mismatch");
  }
  window.validate();
  const int joints = window.joint_count();
  const int length = window.frame_count();
  if (coeff_count < 1 || coeff_count > length) {
    throw ContractError("pad_and_encode_value: bad coefficient count");
  }

  const Eigen::MatrixXd basis_rows = dct_basis(length).topRows(coeff_count);
  DctCoeffs out;
  out.window_length = length;
  out.coeffs.resize(coeff_count, joints * 3);
  Eigen::VectorXd trajectory(length);
  for (int j = 0; j < joints; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      for (int f = 0; f < length; ++f) trajectory(f) = window.frames[static_cast<size_t>(f)](j, axis);
      out.coeffs.col(j * 3 + axis) = basis_rows * trajectory;
    }
  }
  return out;
}

MotionSequence decode_window(const DctCoeffs& coeffs, int joint_count, double fps) {
  const int length = coeffs.window_length;
  const int coeff_count = static_cast<int>(coeffs.coeffs.rows());
  if (coeffs.coeffs.cols() != joint_count * 3) {
    throw DimensionError("decode_window: coefficient columns do not match joint count");
  }
  const Eigen::MatrixXd basis_rows = dct_basis(length).topRows(coeff_count);
  // length x (J*3): every joint-coordinate trajectory reconstructed at once
  const Eigen::MatrixXd decoded = basis_rows.transpose() * coeffs.coeffs;

  MotionSequence out;
  out.fps = fps;
  out.frames.resize(static_cast<size_t>(length), Pose(joint_count, 3));
  for (int f = 0; f < length; ++f) {
    for (int j = 0; j < joint_count; ++j) {
      for (int axis = 0; axis < 3; ++axis) {
        out.frames[static_cast<size_t>(f)](j, axis) = decoded(f, j * 3 + axis);
      }
    }
  }
  return out;
}

}  // namespace xmotion
