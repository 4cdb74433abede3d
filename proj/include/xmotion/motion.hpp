#pragma once

#include <vector>

#include "xmotion/geometry.hpp"

namespace xmotion {

// A motion clip: one pose per frame, constant joint count, millimetres.
struct MotionSequence {
  std::vector<Pose> frames;
  double fps = 25.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames[0].rows()); }
  void validate() const;  // F >= 1, constant J, finite coordinates

  MotionSequence slice(int begin, int end) const;  // frames [begin, end)
};

// Sliding sub-sequence windows for the temporal attention: the query is the
// last M observed frames; key window i is the first M frames of value window
// i, which spans M+T frames starting at frame i.
struct SubSequenceBank {
  std::vector<MotionSequence> key_windows;    // N windows of M frames
  std::vector<MotionSequence> value_windows;  // N windows of M+T frames
  MotionSequence query_window;                // last M observed frames
  std::vector<int> start_frames;

  int window_count() const { return static_cast<int>(key_windows.size()); }
};

SubSequenceBank extract_windows(const MotionSequence& seq, int m, int t);

// Per joint-coordinate DCT coefficients of one window.
struct DctCoeffs {
  // coeff_count x (J*3), column layout j*3+axis
  Eigen::MatrixXd coeffs;
  int window_length = 0;
};

// Orthonormal DCT-II, truncated to the first `coeff_count` coefficients.
std::vector<double> dct(const std::vector<double>& trajectory, int coeff_count);
// Inverse; exact when coeff_count == length, least-squares smooth otherwise.
std::vector<double> idct(const std::vector<double>& coeffs, int length);

// L x L orthonormal DCT-II basis matrix B with B(k, n) the k-th basis
// function at sample n, so coeffs = B x and x = B^T coeffs.
Eigen::MatrixXd dct_basis(int length);

DctCoeffs pad_and_encode_value(const MotionSequence& window, int expected_length,
                               int coeff_count);
MotionSequence decode_window(const DctCoeffs& coeffs, int joint_count, double fps);

}  // namespace xmotion
