#include "centroidal_kit/io.hpp"

#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace ckit {

namespace {

void put(std::string& line, double x) {
  line += ',';
  line += format_number(x);
}

void put(std::string& line, const Eigen::Ref<const VecX>& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) put(line, v[k]);
}

void put_pose(std::string& line, const Transform& h) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) put(line, h.rotation(r, c));
  }
  put(line, h.origin);
}

std::string names(const std::string& prefix, std::size_t n) {
  std::string out;
  for (std::size_t k = 1; k <= n; ++k) out += fmt::format(",{}{}", prefix, k);
  return out;
}

std::string six(const std::string& prefix) {
  return fmt::format(",{0}_vx,{0}_vy,{0}_vz,{0}_wx,{0}_wy,{0}_wz", prefix);
}

const std::string kPoseHeader = ",r11,r12,r13,r21,r22,r23,r31,r32,r33,ox,oy,oz";

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_dynamics_csv(std::ostream& os, const Model& model,
                        const std::vector<TrajectorySample>& samples) {
  const std::size_t n = model.dof();
  os << "t" << kPoseHeader << names("s", n) << six("v") << names("sdot", n) << '\n';
  for (const auto& s : samples) {
    std::string line = format_number(s.t);
    put_pose(line, s.state.base_pose);
    put(line, s.state.shape);
    put(line, s.velocity.base_velocity.vector());
    put(line, s.velocity.shape_rate);
    os << line << '\n';
  }
}

void write_centroidal_csv(std::ostream& os, const Model& model,
                          const std::vector<TrajectorySample>& samples) {
  os << "t" << kPoseHeader << six("vloc")
     << ",JA_fx,JA_fy,JA_fz,JA_tx,JA_ty,JA_tz,JG_fx,JG_fy,JG_fz,JG_tx,JG_ty,JG_tz\n";
  for (const auto& s : samples) {
    if (!s.frame) throw std::invalid_argument("centroidal output needs the centroidal frame");
    std::string line = format_number(s.t);
    put_pose(line, *s.frame);
    put(line, locked_velocity(model, s.state, s.velocity, FrameTag::kA).vector());
    put(line, total_momentum(model, s.state, s.velocity, FrameTag::kA).value());
    put(line, total_momentum(model, s.state, s.velocity, FrameTag::kG).value());
    os << line << '\n';
  }
}

void write_momentum_csv(std::ostream& os, const Model& model,
                        const std::vector<TrajectorySample>& samples) {
  os << "t,JA_fx,JA_fy,JA_fz,JA_tx,JA_ty,JA_tz,JG_fx,JG_fy,JG_fz,JG_tx,JG_ty,JG_tz" << six("vloc")
     << six("vave") << '\n';
  for (const auto& s : samples) {
    std::string line = format_number(s.t);
    put(line, total_momentum(model, s.state, s.velocity, FrameTag::kA).value());
    put(line, total_momentum(model, s.state, s.velocity, FrameTag::kG).value());
    put(line, locked_velocity(model, s.state, s.velocity, FrameTag::kB).vector());
    put(line, average_velocity(model, s.state, s.velocity).vector());
    os << line << '\n';
  }
}

std::uint64_t model_hash(const Model& model) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : serialize_model(model)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::ordered_json flatness_report_json(const Model& model, const FlatnessReport& report) {
  nlohmann::ordered_json j;
  j["model_hash"] = fmt::format("{:016x}", model_hash(model));
  j["dof"] = model.dof();
  auto& axes = j["grid"] = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < report.grid.axes.size(); ++a) {
    const auto& ax = report.grid.axes[a];
    axes.push_back({{"joint", model.joints()[a].name}, {"lo", ax.lo}, {"hi", ax.hi}, {"count", ax.count}});
  }
  j["h"] = report.h;
  j["tol"] = report.tol;
  auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"i", p.i + 1}, {"j", p.j + 1}, {"max_norm", p.max_norm}});
  }
  j["max_norm"] = report.max_norm;
  j["verdict"] = report.flat ? "flat" : "non-flat";
  j["method"] = "grid sampling with central-difference curvature";
  if (!report.pairs.empty()) {
    j["worst"] = {{"index", report.worst_index},
                  {"shape", std::vector<double>(report.worst_sample.data(),
                                                report.worst_sample.data() + report.worst_sample.size())},
                  {"i", report.worst_i + 1},
                  {"j", report.worst_j + 1}};
  }
  return j;
}

}  // namespace ckit
