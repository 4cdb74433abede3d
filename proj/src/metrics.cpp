#include "xmotion/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "xmotion/errors.hpp"

namespace xmotion {

namespace {

void check_span(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw ContractError("metric inputs need equal, nonzero frame counts");
  }
  for (size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].rows() != gt[t].rows()) throw DimensionError("metric inputs differ in joints");
  }
}

std::vector<double> per_joint_distance_sums(const std::vector<Pose>& pred,
                                            const std::vector<Pose>& gt) {
  check_span(pred, gt);
  const int joints = static_cast<int>(pred[0].rows());
  std::vector<double> sums(static_cast<size_t>(joints), 0.0);
  for (size_t t = 0; t < pred.size(); ++t) {
    for (int j = 0; j < joints; ++j) {
      sums[static_cast<size_t>(j)] += (pred[t].row(j) - gt[t].row(j)).norm();
    }
  }
  return sums;
}

std::vector<Pose> self_normalized(const std::vector<Pose>& poses, const Skeleton& skeleton) {
  std::vector<Pose> out;
  out.reserve(poses.size());
  for (const Pose& p : poses) out.push_back(apply_transform(normalization_transform(p, skeleton), p));
  return out;
}

std::vector<Pose> aligned_to(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  check_span(pred, gt);
  std::vector<Pose> out;
  out.reserve(pred.size());
  for (size_t t = 0; t < pred.size(); ++t) out.push_back(procrustes_align(pred[t], gt[t]));
  return out;
}

double mean_of(const std::vector<double>& joint_sums, size_t frames) {
  double total = 0;
  for (double s : joint_sums) total += s;
  return total / (static_cast<double>(frames) * static_cast<double>(joint_sums.size()));
}

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

}  // namespace

double mpjpe(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  return mean_of(per_joint_distance_sums(pred, gt), pred.size());
}

std::vector<double> mpjpe_per_joint(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  std::vector<double> sums = per_joint_distance_sums(pred, gt);
  for (double& s : sums) s /= static_cast<double>(pred.size());
  return sums;
}

double sme_person(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                  const Skeleton& skeleton) {
  return mpjpe(self_normalized(pred, skeleton), self_normalized(gt, skeleton));
}

std::vector<double> sme_person_per_joint(const std::vector<Pose>& pred,
                                         const std::vector<Pose>& gt, const Skeleton& skeleton) {
  return mpjpe_per_joint(self_normalized(pred, skeleton), self_normalized(gt, skeleton));
}

double ame_person(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  return mpjpe(aligned_to(pred, gt), gt);
}

std::vector<double> ame_person_per_joint(const std::vector<Pose>& pred,
                                         const std::vector<Pose>& gt) {
  return mpjpe_per_joint(aligned_to(pred, gt), gt);
}

double jme(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f) {
  return 0.5 * (mpjpe(pred_l, gt_l) + mpjpe(pred_f, gt_f));
}

double sme(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f,
           const Skeleton& skeleton) {
  return 0.5 * (sme_person(pred_l, gt_l, skeleton) + sme_person(pred_f, gt_f, skeleton));
}

double ame(const std::vector<Pose>& pred_l, const std::vector<Pose>& pred_f,
           const std::vector<Pose>& gt_l, const std::vector<Pose>& gt_f) {
  return 0.5 * (ame_person(pred_l, gt_l) + ame_person(pred_f, gt_f));
}

int frames_for_horizon(int horizon_ms, double fps) {
  const int frames = static_cast<int>(std::lround(horizon_ms * fps / 1000.0));
  if (frames < 1) throw ContractError("horizon shorter than one frame");
  return frames;
}

const MetricsReport::Row* MetricsReport::find(const std::string& metric, const std::string& role,
                                              const std::string& aerial, int horizon_ms,
                                              int joint) const {
  for (const Row& r : rows) {
    if (r.metric == metric && r.role == role && r.aerial == aerial &&
        r.horizon_ms == horizon_ms && r.joint == joint) {
      return &r;
    }
  }
  return nullptr;
}

double MetricsReport::value(const std::string& metric, const std::string& role,
                            const std::string& aerial, int horizon_ms) const {
  const Row* r = find(metric, role, aerial, horizon_ms);
  if (!r) {
    throw ContractError("report is missing " + metric + "/" + role + "/" + aerial + "/" +
                        std::to_string(horizon_ms));
  }
  return r->value_mm;
}

void MetricsReport::write_csv(std::ostream& out) const {
  out << "metric,role,aerial,horizon_ms,joint,value_mm\n";
  for (const Row& r : rows) {
    out << r.metric << "," << r.role << "," << r.aerial << "," << r.horizon_ms << ",";
    if (r.joint >= 0) out << r.joint;
    out << "," << format_double(r.value_mm) << "\n";
  }
}

void MetricsReport::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out);
}

MetricsReport MetricsReport::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty metrics file", 1);
  ++line_no;
  if (line != "metric,role,aerial,horizon_ms,joint,value_mm") {
    throw ParseError("unexpected metrics header", line_no);
  }
  MetricsReport report;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 6) throw ParseError("expected 6 fields", line_no);
    Row r;
    r.metric = fields[0];
    r.role = fields[1];
    r.aerial = fields[2];
    try {
      r.horizon_ms = std::stoi(fields[3]);
      r.joint = fields[4].empty() ? -1 : std::stoi(fields[4]);
      r.value_mm = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw ParseError("bad numeric field", line_no);
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string MetricsReport::to_table() const {
  std::set<std::string> aerial_set;
  int max_horizon = 0;
  for (const Row& r : rows) {
    if (r.joint >= 0) continue;
    if (r.aerial != "AVG") aerial_set.insert(r.aerial);
    max_horizon = std::max(max_horizon, r.horizon_ms);
  }
  std::vector<std::string> aerials(aerial_set.begin(), aerial_set.end());
  aerials.push_back("AVG");

  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  for (const char* metric : kMetricNames) {
    out << metric << " (mm, " << max_horizon << " ms)\n";
    out << std::setw(10) << "role";
    for (const auto& a : aerials) out << std::setw(12) << a;
    out << "\n";
    for (const char* role : kRoleNames) {
      out << std::setw(10) << role;
      for (const auto& a : aerials) {
        const Row* r = find(metric, role, a, max_horizon);
        if (r) {
          out << std::setw(12) << r->value_mm;
        } else {
          out << std::setw(12) << "-";
        }
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace xmotion
