#include "xmotion/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xmotion/rng.hpp"

namespace xmotion {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

double parse_double(const std::string& s, int line_no) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ParseError("bad floating-point field '" + s + "'", line_no);
  }
  return v;
}

long parse_long(const std::string& s, int line_no) {
  long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ParseError("bad integer field '" + s + "'", line_no);
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ls(line);
  while (std::getline(ls, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

void check_label(const std::string& label, const char* what) {
  if (label.empty() || label.find_first_of(",\n\r \t") != std::string::npos) {
    throw ContractError(std::string(what) + " must be non-empty without commas or whitespace");
  }
}

}  // namespace

void CoupleSequence::validate() const {
  check_label(seq_id, "seq_id");
  check_label(aerial, "aerial");
  if (couple != 1 && couple != 2) throw ContractError("couple id must be 1 or 2");
  leader.validate();
  follower.validate();
  if (leader.frame_count() != follower.frame_count()) {
    throw ContractError("leader and follower frame counts differ");
  }
  if (leader.fps != follower.fps) throw ContractError("leader and follower fps differ");
  if (leader.joint_count() != follower.joint_count()) {
    throw ContractError("leader and follower joint counts differ");
  }
}

SplitSpec split_from_string(const std::string& kind, const std::string& sa_aerial) {
  SplitSpec spec;
  if (kind == "sa") {
    spec.kind = SplitSpec::Kind::SA;
    if (sa_aerial.empty()) throw ContractError("SA split needs a target aerial");
    spec.sa_aerial = sa_aerial;
  } else if (kind == "ca") {
    spec.kind = SplitSpec::Kind::CA;
  } else if (kind == "ea") {
    spec.kind = SplitSpec::Kind::EA;
  } else {
    throw ContractError("unknown split kind: " + kind + " (expected sa|ca|ea)");
  }
  return spec;
}

std::string split_name(SplitSpec::Kind kind) {
  switch (kind) {
    case SplitSpec::Kind::SA: return "sa";
    case SplitSpec::Kind::CA: return "ca";
    case SplitSpec::Kind::EA: return "ea";
  }
  throw ContractError("unknown split kind");
}

DatasetSplit make_split(const std::vector<CoupleSequence>& dataset, const SplitSpec& spec) {
  std::map<std::string, std::set<int>> couples_per_aerial;
  for (const CoupleSequence& seq : dataset) {
    if (seq.couple != 1 && seq.couple != 2) throw ContractError("couple id must be 1 or 2");
    couples_per_aerial[seq.aerial].insert(seq.couple);
  }
  std::set<std::string> common;
  for (const auto& [aerial, couples] : couples_per_aerial) {
    if (couples.size() == 2) common.insert(aerial);
  }

  DatasetSplit split;
  switch (spec.kind) {
    case SplitSpec::Kind::SA: {
      if (!common.count(spec.sa_aerial)) {
        throw ContractError("SA split: aerial '" + spec.sa_aerial +
                            "' is not performed by both couples");
      }
      for (const CoupleSequence& seq : dataset) {
        if (seq.aerial != spec.sa_aerial) continue;
        (seq.couple == 2 ? split.train : split.test).push_back(seq);
      }
      break;
    }
    case SplitSpec::Kind::CA: {
      for (const CoupleSequence& seq : dataset) {
        if (!common.count(seq.aerial)) continue;
        (seq.couple == 2 ? split.train : split.test).push_back(seq);
      }
      break;
    }
    case SplitSpec::Kind::EA: {
      for (const CoupleSequence& seq : dataset) {
        (common.count(seq.aerial) ? split.train : split.test).push_back(seq);
      }
      break;
    }
  }
  return split;
}

void save_sequence_csv(const std::string& path, const CoupleSequence& seq) {
  seq.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "seq_id,aerial,couple,rep,frame,person,joint,x,y,z\n";
  const int joints = seq.leader.joint_count();
  for (int f = 0; f < seq.frame_count(); ++f) {
    for (int person = 0; person < 2; ++person) {
      const Pose& pose =
          person == 0 ? seq.leader.frames[static_cast<size_t>(f)] : seq.follower.frames[static_cast<size_t>(f)];
      for (int j = 0; j < joints; ++j) {
        out << seq.seq_id << "," << seq.aerial << "," << seq.couple << "," << seq.repetition
            << "," << f << "," << (person == 0 ? "leader" : "follower") << "," << j << ","
            << format_double(pose(j, 0)) << "," << format_double(pose(j, 1)) << ","
            << format_double(pose(j, 2)) << "\n";
      }
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

CoupleSequence load_sequence_csv(const std::string& path, double fps) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path, 1);
  ++line_no;
  if (line != "seq_id,aerial,couple,rep,frame,person,joint,x,y,z") {
    throw ParseError("unexpected sequence header in " + path, line_no);
  }

  struct RawRow {
    int frame, person, joint;
    double x, y, z;
  };
  CoupleSequence seq;
  bool have_meta = false;
  std::vector<RawRow> raw;
  int max_frame = -1, max_joint = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 10) {
      throw ParseError("expected 10 fields, found " + std::to_string(f.size()), line_no);
    }
    if (!have_meta) {
      seq.seq_id = f[0];
      seq.aerial = f[1];
      seq.couple = static_cast<int>(parse_long(f[2], line_no));
      seq.repetition = static_cast<int>(parse_long(f[3], line_no));
      have_meta = true;
    } else if (f[0] != seq.seq_id || f[1] != seq.aerial ||
               parse_long(f[2], line_no) != seq.couple ||
               parse_long(f[3], line_no) != seq.repetition) {
      throw ParseError("sequence metadata changes mid-file", line_no);
    }
    RawRow row;
    row.frame = static_cast<int>(parse_long(f[4], line_no));
    if (f[5] == "leader") {
      row.person = 0;
    } else if (f[5] == "follower") {
      row.person = 1;
    } else {
      throw ParseError("person must be leader or follower, got '" + f[5] + "'", line_no);
    }
    row.joint = static_cast<int>(parse_long(f[6], line_no));
    row.x = parse_double(f[7], line_no);
    row.y = parse_double(f[8], line_no);
    row.z = parse_double(f[9], line_no);
    if (row.frame < 0 || row.joint < 0) throw ParseError("negative frame or joint index", line_no);
    max_frame = std::max(max_frame, row.frame);
    max_joint = std::max(max_joint, row.joint);
    raw.push_back(row);
  }
  if (raw.empty()) throw ParseError("sequence file has no data rows: " + path);

  const int frames = max_frame + 1, joints = max_joint + 1;
  if (raw.size() != static_cast<size_t>(frames) * 2 * joints) {
    throw ParseError("expected " + std::to_string(static_cast<size_t>(frames) * 2 * joints) +
                     " rows for " + std::to_string(frames) + " frames x 2 persons x " +
                     std::to_string(joints) + " joints, found " + std::to_string(raw.size()));
  }
  seq.leader.fps = seq.follower.fps = fps;
  seq.leader.frames.assign(static_cast<size_t>(frames), Pose::Zero(joints, 3));
  seq.follower.frames.assign(static_cast<size_t>(frames), Pose::Zero(joints, 3));
  std::vector<bool> seen(static_cast<size_t>(frames) * 2 * joints, false);
  for (const RawRow& row : raw) {
    const size_t key = (static_cast<size_t>(row.frame) * 2 + row.person) * joints + row.joint;
    if (seen[key]) throw ParseError("duplicate (frame, person, joint) row in " + path);
    seen[key] = true;
    Pose& pose = row.person == 0 ? seq.leader.frames[static_cast<size_t>(row.frame)]
                                 : seq.follower.frames[static_cast<size_t>(row.frame)];
    pose(row.joint, 0) = row.x;
    pose(row.joint, 1) = row.y;
    pose(row.joint, 2) = row.z;
  }
  seq.validate();
  return seq;
}

void save_dataset(const std::string& dir, const std::vector<CoupleSequence>& seqs) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir + "/index.csv", std::ios::trunc);
  if (!index) throw IoError("cannot write " + dir + "/index.csv");
  index << "file,seq_id,aerial,couple,rep,fps\n";
  for (const CoupleSequence& seq : seqs) {
    const std::string file = seq.seq_id + ".csv";
    save_sequence_csv(dir + "/" + file, seq);
    index << file << "," << seq.seq_id << "," << seq.aerial << "," << seq.couple << ","
          << seq.repetition << "," << format_double(seq.leader.fps) << "\n";
  }
  if (!index) throw IoError("write failed for " + dir + "/index.csv");
}

std::vector<CoupleSequence> load_sequences(const std::string& dir) {
  const std::string index_path = dir + "/index.csv";
  std::ifstream index(index_path);
  if (!index) throw IoError("cannot open " + index_path);
  std::string line;
  int line_no = 0;
  if (!std::getline(index, line)) throw ParseError("missing header in " + index_path, 1);
  ++line_no;
  if (line != "file,seq_id,aerial,couple,rep,fps") {
    throw ParseError("unexpected index header in " + index_path, line_no);
  }

  std::vector<CoupleSequence> seqs;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 6) throw ParseError("expected 6 index fields", line_no);
    CoupleSequence seq = load_sequence_csv(dir + "/" + f[0], parse_double(f[5], line_no));
    if (seq.seq_id != f[1] || seq.aerial != f[2] ||
        seq.couple != static_cast<int>(parse_long(f[3], line_no)) ||
        seq.repetition != static_cast<int>(parse_long(f[4], line_no))) {
      throw ParseError("index metadata disagrees with " + f[0], line_no);
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

std::vector<CoupleSequence> sample_test_subsequences(const CoupleSequence& seq, int count,
                                                     int in_len, int out_len) {
  seq.validate();
  if (count < 1 || in_len < 1 || out_len < 0) {
    throw ContractError("sample_test_subsequences: bad arguments");
  }
  const int window = in_len + out_len;
  const int frames = seq.frame_count();
  if (frames < window) {
    throw InsufficientHistoryError("sequence shorter than one evaluation window");
  }
  const int max_start = frames - window;

  std::vector<int> starts;
  for (int i = 0; i < count; ++i) {
    const int start =
        count == 1 ? 0
                   : static_cast<int>(std::lround(static_cast<double>(i) * max_start /
                                                  static_cast<double>(count - 1)));
    if (starts.empty() || start != starts.back()) starts.push_back(start);
  }

  std::vector<CoupleSequence> windows;
  windows.reserve(starts.size());
  for (int start : starts) {
    CoupleSequence w;
    w.seq_id = seq.seq_id;
    w.aerial = seq.aerial;
    w.couple = seq.couple;
    w.repetition = seq.repetition;
    w.leader = seq.leader.slice(start, start + window);
    w.follower = seq.follower.slice(start, start + window);
    windows.push_back(std::move(w));
  }
  return windows;
}

CoupleSequence downsample(const CoupleSequence& seq, int factor) {
  if (factor < 1) throw ContractError("downsample: factor must be >= 1");
  seq.validate();
  CoupleSequence out = seq;
  out.leader.frames.clear();
  out.follower.frames.clear();
  for (int f = 0; f < seq.frame_count(); f += factor) {
    out.leader.frames.push_back(seq.leader.frames[static_cast<size_t>(f)]);
    out.follower.frames.push_back(seq.follower.frames[static_cast<size_t>(f)]);
  }
  out.leader.fps = seq.leader.fps / factor;
  out.follower.fps = seq.follower.fps / factor;
  return out;
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "lagged-mirror") return Scenario::LaggedMirror;
  if (name == "coupled-oscillator") return Scenario::CoupledOscillator;
  if (name == "orbit-lift") return Scenario::OrbitLift;
  throw ContractError("unknown scenario: " + name +
                      " (expected lagged-mirror|coupled-oscillator|orbit-lift)");
}

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::LaggedMirror: return "lagged-mirror";
    case Scenario::CoupledOscillator: return "coupled-oscillator";
    case Scenario::OrbitLift: return "orbit-lift";
  }
  throw ContractError("unknown scenario");
}

namespace {

// Rest-pose template for the 18-joint skeleton, millimetres, z up, person
// facing +y, hip-center at (0, 0, 1000).
Pose skeleton_template() {
  Pose p(18, 3);
  p << 0, 0, 1650,      // head-top
      80, 0, 1580,      // head-left
      -80, 0, 1580,     // head-right
      0, 0, 1450,       // neck
      190, 0, 1400,     // left-shoulder
      -190, 0, 1400,    // right-shoulder
      330, 0, 1250,     // left-elbow
      -330, 0, 1250,    // right-elbow
      360, 20, 1050,    // left-wrist
      -360, 20, 1050,   // right-wrist
      110, 0, 1000,     // left-hip
      -110, 0, 1000,    // right-hip
      120, 10, 550,     // left-knee
      -120, 10, 550,    // right-knee
      130, -40, 60,     // left-heel
      -130, -40, 60,    // right-heel
      140, 160, 20,     // left-toes
      -140, 160, 20;    // right-toes
  return p;
}

struct Sinusoid {
  double amp = 0, freq = 0, phase = 0;
  double operator()(double seconds) const {
    return amp * std::sin(2.0 * M_PI * freq * seconds + phase);
  }
};

Sinusoid draw_sinusoid(std::mt19937_64& rng, double amp_lo, double amp_hi, double freq_lo,
                       double freq_hi) {
  Sinusoid s;
  s.amp = uniform(rng, amp_lo, amp_hi);
  s.freq = uniform(rng, freq_lo, freq_hi);
  s.phase = uniform(rng, 0.0, 2.0 * M_PI);
  return s;
}

struct LimbMotion {
  Eigen::Vector3d axis_proximal, axis_distal;
  Sinusoid swing_proximal, swing_distal;
};

// Joint groups rotated together; rotating a whole chain segment about its
// pivot keeps every bone length exactly.
struct LimbChain {
  int pivot;
  std::vector<int> chain;       // joints moved by the proximal swing
  int distal_pivot;             // second pivot inside the chain
  std::vector<int> distal_set;  // joints moved by the distal swing
};

const std::vector<LimbChain>& limb_chains() {
  static const std::vector<LimbChain> chains = {
      {4, {6, 8}, 6, {8}},          // left arm
      {5, {7, 9}, 7, {9}},          // right arm
      {10, {12, 14, 16}, 12, {14, 16}},  // left leg
      {11, {13, 15, 17}, 13, {15, 17}},  // right leg
  };
  return chains;
}

struct BodyMotion {
  Sinusoid root_x, root_y, root_z;
  Sinusoid yaw, sway;
  std::vector<LimbMotion> limbs;
};

BodyMotion draw_body_motion(std::mt19937_64& rng) {
  BodyMotion m;
  m.root_x = draw_sinusoid(rng, 120, 320, 0.10, 0.35);
  m.root_y = draw_sinusoid(rng, 120, 320, 0.10, 0.35);
  m.root_z = draw_sinusoid(rng, 30, 90, 0.15, 0.40);
  m.yaw = draw_sinusoid(rng, 0.3, 0.8, 0.08, 0.25);
  m.sway = draw_sinusoid(rng, 0.05, 0.15, 0.10, 0.30);
  for (size_t i = 0; i < limb_chains().size(); ++i) {
    LimbMotion limb;
    limb.axis_proximal =
        Eigen::Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
    limb.axis_distal =
        Eigen::Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
    limb.swing_proximal = draw_sinusoid(rng, 0.25, 0.6, 0.2, 0.6);
    limb.swing_distal = draw_sinusoid(rng, 0.15, 0.45, 0.3, 0.8);
    m.limbs.push_back(limb);
  }
  return m;
}

// Per-frame articulation state: all limb angles plus the root placement.
struct BodyState {
  std::array<double, 8> limb_angles{};  // proximal/distal per limb
  Eigen::Vector3d root_offset = Eigen::Vector3d::Zero();
  double yaw = 0, sway = 0;
};

BodyState body_state_at(const BodyMotion& motion, double seconds) {
  BodyState s;
  for (size_t i = 0; i < motion.limbs.size(); ++i) {
    s.limb_angles[2 * i] = motion.limbs[i].swing_proximal(seconds);
    s.limb_angles[2 * i + 1] = motion.limbs[i].swing_distal(seconds);
  }
  s.root_offset = {motion.root_x(seconds), motion.root_y(seconds), motion.root_z(seconds)};
  s.yaw = motion.yaw(seconds);
  s.sway = motion.sway(seconds);
  return s;
}

void rotate_about(Pose& pose, const std::vector<int>& joints, int pivot,
                  const Eigen::Vector3d& axis, double angle) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  const Eigen::Vector3d center = pose.row(pivot);
  for (int j : joints) {
    const Eigen::Vector3d p = pose.row(j);
    pose.row(j) = (r * (p - center) + center).transpose();
  }
}

Pose articulate(const BodyMotion& motion, const BodyState& state) {
  Pose pose = skeleton_template();
  const auto& chains = limb_chains();
  for (size_t i = 0; i < chains.size(); ++i) {
    rotate_about(pose, chains[i].chain, chains[i].pivot, motion.limbs[i].axis_proximal,
                 state.limb_angles[2 * i]);
    rotate_about(pose, chains[i].distal_set, chains[i].distal_pivot, motion.limbs[i].axis_distal,
                 state.limb_angles[2 * i + 1]);
  }
  const Eigen::Matrix3d root_rot =
      (Eigen::AngleAxisd(state.yaw, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(state.sway, Eigen::Vector3d::UnitY()))
          .toRotationMatrix();
  const Eigen::Vector3d hip_center(0, 0, 1000);
  for (int j = 0; j < pose.rows(); ++j) {
    const Eigen::Vector3d p = pose.row(j);
    pose.row(j) = (root_rot * (p - hip_center) + hip_center + state.root_offset).transpose();
  }
  return pose;
}

Pose mirror_x(const Pose& pose) {
  Pose out = pose;
  out.col(0) *= -1.0;
  return out;
}

// Critically-damped-ish second-order tracking, semi-implicit Euler.
struct SecondOrderFilter {
  double omega = 2.0 * M_PI * 0.8, zeta = 0.8;
  double value = 0, velocity = 0;
  void reset(double v) { value = v, velocity = 0; }
  double step(double target, double dt) {
    velocity += dt * (omega * omega * (target - value) - 2.0 * zeta * omega * velocity);
    value += dt * velocity;
    return value;
  }
};

}  // namespace

CoupleSequence synthesize_couple(std::uint64_t seed, const SynthConfig& cfg) {
  if (cfg.frames < 1) throw ContractError("synthesize_couple: need at least one frame");
  if (cfg.lag < 0) throw ContractError("synthesize_couple: lag must be >= 0");

  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(cfg.scenario)));
  const BodyMotion leader_motion = draw_body_motion(rng);

  CoupleSequence couple;
  couple.aerial = scenario_name(cfg.scenario);
  couple.seq_id = couple.aerial + "-s" + std::to_string(seed);
  couple.leader.fps = couple.follower.fps = cfg.fps;
  couple.leader.frames.reserve(static_cast<size_t>(cfg.frames));
  couple.follower.frames.reserve(static_cast<size_t>(cfg.frames));

  auto leader_pose_at = [&](int frame) {
    return articulate(leader_motion, body_state_at(leader_motion, frame / cfg.fps));
  };

  switch (cfg.scenario) {
    case Scenario::LaggedMirror: {
      const Eigen::Vector3d offset(uniform(rng, 800, 1400), uniform(rng, 200, 600), 0.0);
      for (int f = 0; f < cfg.frames; ++f) {
        couple.leader.frames.push_back(leader_pose_at(f));
        Pose follower = mirror_x(leader_pose_at(f - cfg.lag));
        follower.rowwise() += offset.transpose();
        couple.follower.frames.push_back(std::move(follower));
      }
      break;
    }
    case Scenario::CoupledOscillator: {
      const Eigen::Vector3d offset(uniform(rng, 900, 1400), uniform(rng, 200, 500), 0.0);
      const double dt = 1.0 / cfg.fps;
      std::array<SecondOrderFilter, 8> angle_filters;
      std::array<SecondOrderFilter, 3> root_filters;
      SecondOrderFilter yaw_filter, sway_filter;
      const BodyState init = body_state_at(leader_motion, 0.0);
      for (size_t i = 0; i < 8; ++i) angle_filters[i].reset(-init.limb_angles[i]);
      for (int a = 0; a < 3; ++a) root_filters[static_cast<size_t>(a)].reset(init.root_offset[a]);
      yaw_filter.reset(-init.yaw);
      sway_filter.reset(init.sway);

      for (int f = 0; f < cfg.frames; ++f) {
        const BodyState target = body_state_at(leader_motion, f / cfg.fps);
        BodyState follower_state;
        for (size_t i = 0; i < 8; ++i) {
          // limbs track the leader's angles with opposite sign
          follower_state.limb_angles[i] = angle_filters[i].step(-target.limb_angles[i], dt);
        }
        for (int a = 0; a < 3; ++a) {
          follower_state.root_offset[a] =
              root_filters[static_cast<size_t>(a)].step(target.root_offset[a], dt);
        }
        follower_state.yaw = yaw_filter.step(-target.yaw, dt);
        follower_state.sway = sway_filter.step(target.sway, dt);

        couple.leader.frames.push_back(leader_pose_at(f));
        Pose follower = articulate(leader_motion, follower_state);
        follower.rowwise() += offset.transpose();
        couple.follower.frames.push_back(std::move(follower));
      }
      break;
    }
    case Scenario::OrbitLift: {
      const BodyMotion follower_motion = draw_body_motion(rng);
      const double radius = uniform(rng, 900, 1300);
      const double orbit_freq = uniform(rng, 0.05, 0.15);
      const double phase0 = uniform(rng, 0.0, 2.0 * M_PI);
      const double lift_gain = uniform(rng, 0.5, 1.2);
      const double wrist_rest_z = skeleton_template()(8, 2);
      for (int f = 0; f < cfg.frames; ++f) {
        const Pose leader = leader_pose_at(f);
        const Eigen::Vector3d leader_hips =
            0.5 * (leader.row(10) + leader.row(11)).transpose();
        // orbit phase advances with time and with how high the leader's arm is
        const double lift = (leader(8, 2) - wrist_rest_z) / 500.0;
        const double psi = phase0 + 2.0 * M_PI * orbit_freq * f / cfg.fps + lift_gain * lift;

        BodyState state = body_state_at(follower_motion, f / cfg.fps);
        state.root_offset = Eigen::Vector3d::Zero();
        state.yaw = psi + M_PI;
        Pose follower = articulate(follower_motion, state);
        const Eigen::Vector3d orbit_pos =
            leader_hips + Eigen::Vector3d(radius * std::cos(psi), radius * std::sin(psi), 0.0);
        const Eigen::Vector3d follower_hips =
            0.5 * (follower.row(10) + follower.row(11)).transpose();
        follower.rowwise() += (orbit_pos - follower_hips).transpose();
        couple.leader.frames.push_back(leader);
        couple.follower.frames.push_back(std::move(follower));
      }
      break;
    }
  }
  return couple;
}

CoupleSequence synthesize_couple(std::uint64_t seed, Scenario scenario, int frames) {
  SynthConfig cfg;
  cfg.scenario = scenario;
  cfg.frames = frames;
  return synthesize_couple(seed, cfg);
}

CoupleSequence normalize_couple(const CoupleSequence& seq, const Skeleton& skeleton) {
  seq.validate();
  CoupleSequence out = seq;
  for (int f = 0; f < seq.frame_count(); ++f) {
    const RigidTransform t =
        normalization_transform(seq.leader.frames[static_cast<size_t>(f)], skeleton);
    out.leader.frames[static_cast<size_t>(f)] =
        apply_transform(t, seq.leader.frames[static_cast<size_t>(f)]);
    out.follower.frames[static_cast<size_t>(f)] =
        apply_transform(t, seq.follower.frames[static_cast<size_t>(f)]);
  }
  return out;
}

}  // namespace xmotion
