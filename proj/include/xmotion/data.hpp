#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmotion/geometry.hpp"
#include "xmotion/motion.hpp"

namespace xmotion {

// Time-aligned leader/follower recording of one aerial execution.
struct CoupleSequence {
  std::string seq_id;
  std::string aerial;
  int couple = 1;  // {1, 2}
  int repetition = 0;
  MotionSequence leader;
  MotionSequence follower;

  int frame_count() const { return leader.frame_count(); }
  void validate() const;  // equal frame counts and fps across the two persons
};

struct SplitSpec {
  enum class Kind { SA, CA, EA };
  Kind kind = Kind::CA;
  std::string sa_aerial;  // SA only: the common aerial to isolate
};

SplitSpec split_from_string(const std::string& kind, const std::string& sa_aerial = "");
std::string split_name(SplitSpec::Kind kind);

struct DatasetSplit {
  std::vector<CoupleSequence> train;
  std::vector<CoupleSequence> test;
};

// SA: train couple 2's performances of one common aerial, test couple 1's.
// CA: train all couple-2 common aerials, test all couple-1 common aerials.
// EA: train every common aerial (both couples), test the couple-specific ones.
DatasetSplit make_split(const std::vector<CoupleSequence>& dataset, const SplitSpec& spec);

// --- file formats ---
// Sequence CSV: seq_id,aerial,couple,rep,frame,person,joint,x,y,z with person
// in {leader, follower}; coordinates in millimetres, written so a reload is
// bit-exact. A dataset directory holds one CSV per sequence plus index.csv
// (file,seq_id,aerial,couple,rep,fps).
void save_sequence_csv(const std::string& path, const CoupleSequence& seq);
CoupleSequence load_sequence_csv(const std::string& path, double fps);
void save_dataset(const std::string& dir, const std::vector<CoupleSequence>& seqs);
std::vector<CoupleSequence> load_sequences(const std::string& dir);

// `count` windows of in_len + out_len frames at deterministic, evenly spaced
// start offsets; fewer only when the sequence cannot supply distinct starts.
std::vector<CoupleSequence> sample_test_subsequences(const CoupleSequence& seq, int count,
                                                     int in_len, int out_len);

// Keeps every factor-th frame starting at frame 0 and divides fps.
CoupleSequence downsample(const CoupleSequence& seq, int factor);

// --- synthetic coupled motion ---

enum class Scenario { LaggedMirror, CoupledOscillator, OrbitLift };
Scenario scenario_from_string(const std::string& name);
std::string scenario_name(Scenario scenario);

struct SynthConfig {
  Scenario scenario = Scenario::LaggedMirror;
  int frames = 150;
  double fps = 25.0;
  int lag = 4;  // LaggedMirror: follower trails the mirrored leader by this many frames
};

// Deterministic given the seed. The leader moves on smooth sinusoidal joint
// curves over the 18-joint skeleton; the follower is a scenario-defined
// function of leader history. Bone lengths stay constant per person.
CoupleSequence synthesize_couple(std::uint64_t seed, const SynthConfig& cfg);
CoupleSequence synthesize_couple(std::uint64_t seed, Scenario scenario, int frames);

// Per-frame couple normalization: the transform computed from the leader's
// pose at each frame is applied to both persons at that frame.
CoupleSequence normalize_couple(const CoupleSequence& seq, const Skeleton& skeleton);

}  // namespace xmotion
