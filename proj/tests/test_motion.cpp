#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "xmotion/motion.hpp"
#include "xmotion/rng.hpp"

using namespace xmotion;

namespace {

MotionSequence constant_sequence(int frames, int joints, double value) {
  MotionSequence seq;
  seq.frames.assign(static_cast<size_t>(frames), Pose::Constant(joints, 3, value));
  return seq;
}

MotionSequence random_sequence(int frames, int joints, std::mt19937_64& rng) {
  MotionSequence seq;
  for (int f = 0; f < frames; ++f) {
    Pose p(joints, 3);
    for (int j = 0; j < joints; ++j)
      for (int a = 0; a < 3; ++a) p(j, a) = uniform(rng, -1000, 1000);
    seq.frames.push_back(std::move(p));
  }
  return seq;
}

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = uniform(rng, -5, 5);
  return v;
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("window extraction counts") {
  std::mt19937_64 rng(3);

  SUBCASE("boundary: F == M + T gives one window") {
    const MotionSequence seq = random_sequence(7, 4, rng);
    const SubSequenceBank bank = extract_windows(seq, 4, 3);
    REQUIRE(bank.window_count() == 1);
    CHECK(bank.start_frames[0] == 0);
    for (int f = 0; f < 4; ++f) {
      CHECK(bank.key_windows[0].frames[static_cast<size_t>(f)] ==
            seq.frames[static_cast<size_t>(f)]);
    }
  }
  SUBCASE("protocol shape: 50 observed, M=10, T=10 gives 31") {
    const MotionSequence seq = random_sequence(50, 4, rng);
    CHECK(extract_windows(seq, 10, 10).window_count() == 31);
  }
  SUBCASE("too short errors") {
    const MotionSequence seq = random_sequence(19, 4, rng);
    CHECK_THROWS_AS(extract_windows(seq, 10, 10), InsufficientHistoryError);
  }
  SUBCASE("exhaustive count formula up to 100 frames") {
    for (int f_in = 2; f_in <= 100; ++f_in) {
      const MotionSequence seq = constant_sequence(f_in, 4, 1.0);
      for (int m = 1; m + 1 <= f_in; m += 3) {
        for (int t = 1; m + t <= f_in; t += 3) {
          const SubSequenceBank bank = extract_windows(seq, m, t);
          CHECK(bank.window_count() == f_in - m - t + 1);
          CHECK(bank.query_window.frame_count() == m);
          CHECK(bank.value_windows.back().frame_count() == m + t);
        }
      }
    }
  }
  SUBCASE("key window is the start chunk of the value window") {
    const MotionSequence seq = random_sequence(20, 3, rng);
    const SubSequenceBank bank = extract_windows(seq, 5, 4);
    for (int i = 0; i < bank.window_count(); ++i) {
      for (int f = 0; f < 5; ++f) {
        CHECK(bank.key_windows[static_cast<size_t>(i)].frames[static_cast<size_t>(f)] ==
              bank.value_windows[static_cast<size_t>(i)].frames[static_cast<size_t>(f)]);
      }
    }
  }
}

TEST_CASE("dct known values") {
  SUBCASE("constant trajectory is DC-only") {
    const std::vector<double> coeffs = dct({5, 5, 5, 5}, 4);
    CHECK(coeffs[0] == doctest::Approx(10.0).epsilon(1e-12));  // 5 * sqrt(4)
    for (int k = 1; k < 4; ++k) CHECK(std::abs(coeffs[static_cast<size_t>(k)]) < 1e-12);
  }
  SUBCASE("basis vectors map to unit coefficients") {
    const int length = 9;
    const Eigen::MatrixXd basis = dct_basis(length);
    for (int k = 0; k < length; ++k) {
      std::vector<double> row(static_cast<size_t>(length));
      for (int n = 0; n < length; ++n) row[static_cast<size_t>(n)] = basis(k, n);
      const std::vector<double> coeffs = dct(row, length);
      for (int i = 0; i < length; ++i) {
        CHECK(std::abs(coeffs[static_cast<size_t>(i)] - (i == k ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
  SUBCASE("zero trajectory") {
    for (double c : dct(std::vector<double>(6, 0.0), 6)) CHECK(c == 0.0);
  }
  SUBCASE("coefficient count bounds") {
    CHECK_THROWS_AS(dct({1, 2, 3}, 4), ContractError);
    CHECK_THROWS_AS(dct({}, 1), ContractError);
  }
}

TEST_CASE("idct known values") {
  std::mt19937_64 rng(9);
  SUBCASE("round trip within 1e-9") {
    const std::vector<double> x = random_vector(17, rng);
    const std::vector<double> back = idct(dct(x, 17), 17);
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9);
  }
  SUBCASE("zero coefficients decode to zero") {
    for (double v : idct(std::vector<double>(3, 0.0), 8)) CHECK(v == 0.0);
  }
  SUBCASE("single DC coefficient decodes to c / sqrt(L)") {
    const int length = 16;
    const double c = 3.25;
    for (double v : idct({c}, length)) {
      CHECK(v == doctest::Approx(c / std::sqrt(static_cast<double>(length))).epsilon(1e-12));
    }
  }
}

TEST_CASE("dct is orthonormal and linear") {
  std::mt19937_64 rng(13);
  SUBCASE("Parseval within 1e-9") {
    const std::vector<double> x = random_vector(25, rng);
    CHECK(std::abs(norm2(dct(x, 25)) - norm2(x)) < 1e-9);
  }
  SUBCASE("linearity within 1e-9") {
    const int n = 12;
    const std::vector<double> x = random_vector(n, rng), y = random_vector(n, rng);
    const double a = 2.5, b = -1.25;
    std::vector<double> combo(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      combo[static_cast<size_t>(i)] =
          a * x[static_cast<size_t>(i)] + b * y[static_cast<size_t>(i)];
    }
    const auto cx = dct(x, n), cy = dct(y, n), cc = dct(combo, n);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(cc[static_cast<size_t>(i)] -
                     (a * cx[static_cast<size_t>(i)] + b * cy[static_cast<size_t>(i)])) < 1e-9);
    }
  }
}

TEST_CASE("value window encoding") {
  SUBCASE("constant pose gives DC-only coefficients") {
    const MotionSequence window = constant_sequence(12, 4, 7.5);
    const DctCoeffs coeffs = pad_and_encode_value(window, 12, 12);
    for (int col = 0; col < coeffs.coeffs.cols(); ++col) {
      CHECK(coeffs.coeffs(0, col) == doctest::Approx(7.5 * std::sqrt(12.0)).epsilon(1e-12));
      for (int k = 1; k < 12; ++k) CHECK(std::abs(coeffs.coeffs(k, col)) < 1e-9);
    }
  }
  SUBCASE("lossless round trip within 1e-9") {
    std::mt19937_64 rng(17);
    const MotionSequence window = random_sequence(14, 5, rng);
    const DctCoeffs coeffs = pad_and_encode_value(window, 14, 14);
    const MotionSequence decoded = decode_window(coeffs, 5, window.fps);
    for (int f = 0; f < 14; ++f) {
      CHECK((decoded.frames[static_cast<size_t>(f)] - window.frames[static_cast<size_t>(f)])
                .cwiseAbs()
                .maxCoeff() < 1e-9);
    }
  }
  SUBCASE("wrong window length errors") {
    const MotionSequence window = constant_sequence(10, 4, 1.0);
    CHECK_THROWS_AS(pad_and_encode_value(window, 12, 6), ContractError);
  }
  SUBCASE("half-rate truncation keeps a slow sinusoid within 1 percent") {
    const int length = 20;
    const double amplitude = 300.0;
    MotionSequence window;
    for (int f = 0; f < length; ++f) {
      Pose p(4, 3);
      for (int j = 0; j < 4; ++j) {
        for (int a = 0; a < 3; ++a) {
          // below a quarter cycle over the window: smooth and truncatable
          p(j, a) = amplitude * std::sin(2.0 * M_PI * 0.25 * (f / 20.0) + 0.3 * j + 0.2 * a);
        }
      }
      window.frames.push_back(std::move(p));
    }
    const DctCoeffs coeffs = pad_and_encode_value(window, length, length / 2);
    const MotionSequence decoded = decode_window(coeffs, 4, window.fps);
    double worst = 0;
    for (int f = 0; f < length; ++f) {
      worst = std::max(worst, (decoded.frames[static_cast<size_t>(f)] -
                               window.frames[static_cast<size_t>(f)])
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    CHECK(worst < 0.01 * amplitude);
  }
}

TEST_CASE("sequence validation") {
  MotionSequence seq;
  CHECK_THROWS_AS(seq.validate(), ContractError);
  seq.frames.push_back(Pose::Zero(4, 3));
  seq.frames.push_back(Pose::Zero(5, 3));
  CHECK_THROWS_AS(seq.validate(), DimensionError);
}
