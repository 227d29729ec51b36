#include "centroidal_kit/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace ckit {

using nlohmann::json;

std::string_view to_string(JointType type) {
  return type == JointType::kRevolute ? "revolute" : "prismatic";
}

JointType joint_type_from_string(std::string_view name) {
  if (name == "revolute") return JointType::kRevolute;
  if (name == "prismatic") return JointType::kPrismatic;
  throw ModelError(fmt::format("unknown joint type '{}'", name));
}

Model::Model(std::string base, std::vector<LinkSpec> links, std::vector<JointSpec> joints,
             Vec3 gravity)
    : base_(std::move(base)), links_(std::move(links)), joints_(std::move(joints)),
      gravity_(gravity) {
  std::unordered_map<std::string, std::size_t> link_ids;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (!link_ids.emplace(links_[i].name, i).second) {
      throw ModelError(fmt::format("duplicate link name '{}'", links_[i].name));
    }
  }
  std::unordered_set<std::string> joint_names;
  for (const auto& j : joints_) {
    if (!joint_names.insert(j.name).second) {
      throw ModelError(fmt::format("duplicate joint name '{}'", j.name));
    }
  }
  const auto base_it = link_ids.find(base_);
  if (base_it == link_ids.end()) {
    throw ModelError(fmt::format("base link '{}' is not defined", base_));
  }
  base_index_ = base_it->second;

  const std::size_t nl = links_.size();
  joint_parent_.resize(joints_.size());
  joint_child_.resize(joints_.size());
  std::vector<std::vector<std::size_t>> children(nl);
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const auto p = link_ids.find(joints_[j].parent);
    if (p == link_ids.end()) {
      throw ModelError(fmt::format("joint '{}': unknown parent link '{}'", joints_[j].name,
                                   joints_[j].parent));
    }
    const auto c = link_ids.find(joints_[j].child);
    if (c == link_ids.end()) {
      throw ModelError(fmt::format("joint '{}': unknown child link '{}'", joints_[j].name,
                                   joints_[j].child));
    }
    joint_parent_[j] = p->second;
    joint_child_[j] = c->second;
    children[p->second].push_back(j);
  }

  // Directed cycle detection over parent -> child edges.
  std::vector<int> mark(nl, 0);  // 0 unvisited, 1 on stack, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t l) {
    mark[l] = 1;
    for (std::size_t j : children[l]) {
      const std::size_t c = joint_child_[j];
      if (mark[c] == 1) {
        throw ModelError(fmt::format("joint '{}': cycle in the joint graph", joints_[j].name));
      }
      if (mark[c] == 0) visit(c);
    }
    mark[l] = 2;
  };
  for (std::size_t l = 0; l < nl; ++l) {
    if (mark[l] == 0) visit(l);
  }

  parent_joint_.assign(nl, std::nullopt);
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const std::size_t c = joint_child_[j];
    if (c == base_index_) {
      throw ModelError(fmt::format("joint '{}': the base link cannot be a child", joints_[j].name));
    }
    if (parent_joint_[c]) {
      throw ModelError(fmt::format("link '{}' has two parent joints", links_[c].name));
    }
    parent_joint_[c] = j;
  }

  traversal_.reserve(nl);
  traversal_.push_back(base_index_);
  for (std::size_t k = 0; k < traversal_.size(); ++k) {
    for (std::size_t j : children[traversal_[k]]) traversal_.push_back(joint_child_[j]);
  }
  if (traversal_.size() != nl) {
    for (std::size_t l = 0; l < nl; ++l) {
      if (l != base_index_ && !parent_joint_[l]) {
        throw ModelError(fmt::format("link '{}' is not connected to the base", links_[l].name));
      }
    }
  }
}

double Model::total_mass() const {
  double m = 0.0;
  for (const auto& l : links_) m += l.inertia.mass();
  return m;
}

std::size_t Model::link_index(std::string_view name) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == name) return i;
  }
  throw ModelError(fmt::format("unknown link '{}'", name));
}

std::size_t Model::joint_index(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return i;
  }
  throw ModelError(fmt::format("unknown joint '{}'", name));
}

std::vector<std::size_t> Model::support_joints(std::size_t link) const {
  std::vector<std::size_t> path;
  for (auto j = parent_joint_[link]; j; j = parent_joint_[joint_parent_[*j]]) {
    path.push_back(*j);
  }
  return {path.rbegin(), path.rend()};
}

bool Model::joint_supports(std::size_t ancestor, std::size_t j) const {
  for (std::optional<std::size_t> k = j; k; k = parent_joint_[joint_parent_[*k]]) {
    if (*k == ancestor) return true;
  }
  return false;
}

Model Model::with_gravity(const Vec3& gravity) const {
  Model copy = *this;
  copy.gravity_ = gravity;
  return copy;
}

State zero_state(const Model& model) {
  return State{Transform::Identity(), VecX::Zero(static_cast<Eigen::Index>(model.dof()))};
}

VelocityState zero_velocity(const Model& model) {
  return VelocityState{SpatialMotion::Zero(),
                       VecX::Zero(static_cast<Eigen::Index>(model.dof()))};
}

std::vector<std::string> validate(const Model& model) {
  std::vector<std::string> report;
  for (const auto& l : model.links()) {
    if (!l.inertia.is_positive_definite()) {
      report.push_back(fmt::format("link '{}': inertia not SPD", l.name));
    }
  }
  for (const auto& j : model.joints()) {
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-10) {
      report.push_back(fmt::format("joint '{}': non-unit axis", j.name));
    }
    if (!j.origin_xyz.allFinite() || !j.origin_rpy.allFinite()) {
      report.push_back(fmt::format("joint '{}': non-finite origin", j.name));
    }
  }
  if (!model.gravity().allFinite()) report.emplace_back("gravity: non-finite");
  return report;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ModelError(fmt::format("{}: missing field '{}'", where, key));
  }
  return obj.at(key);
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ModelError(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ModelError(fmt::format("{}: expected a string", where));
  return v.get<std::string>();
}

Vec3 as_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) {
    throw ModelError(fmt::format("{}: expected an array of 3 numbers", where));
  }
  return Vec3(as_number(v[0], where), as_number(v[1], where), as_number(v[2], where));
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Model parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ModelError(fmt::format("malformed document: {}", e.what()));
  }
  if (!doc.is_object()) throw ModelError("document: expected an object");

  const std::string base = as_string(require(doc, "base", "document"), "base");
  Vec3 gravity(0.0, 0.0, -9.81);
  if (doc.contains("gravity")) gravity = as_vec3(doc.at("gravity"), "gravity");

  const json& jlinks = require(doc, "links", "document");
  if (!jlinks.is_array()) throw ModelError("links: expected an array");
  std::vector<LinkSpec> links;
  for (std::size_t i = 0; i < jlinks.size(); ++i) {
    const json& l = jlinks[i];
    std::string where = fmt::format("links[{}]", i);
    const std::string name = as_string(require(l, "name", where), where + ".name");
    where = fmt::format("link '{}'", name);
    const double mass = as_number(require(l, "mass", where), where + ".mass");
    const Vec3 com = as_vec3(require(l, "com", where), where + ".com");
    const json& in = require(l, "inertia", where);
    if (!in.is_array() || in.size() != 6) {
      throw ModelError(fmt::format("{}.inertia: expected [ixx, ixy, ixz, iyy, iyz, izz]", where));
    }
    double e[6];
    for (int k = 0; k < 6; ++k) e[k] = as_number(in[k], where + ".inertia");
    Mat3 rot;
    rot << e[0], e[1], e[2],
           e[1], e[3], e[4],
           e[2], e[4], e[5];
    links.push_back(LinkSpec{name, SpatialInertia(mass, com, rot)});
  }

  std::vector<JointSpec> joints;
  if (doc.contains("joints")) {
    const json& jjoints = doc.at("joints");
    if (!jjoints.is_array()) throw ModelError("joints: expected an array");
    for (std::size_t i = 0; i < jjoints.size(); ++i) {
      const json& j = jjoints[i];
      std::string where = fmt::format("joints[{}]", i);
      JointSpec spec;
      spec.name = as_string(require(j, "name", where), where + ".name");
      where = fmt::format("joint '{}'", spec.name);
      spec.parent = as_string(require(j, "parent", where), where + ".parent");
      spec.child = as_string(require(j, "child", where), where + ".child");
      try {
        spec.type = joint_type_from_string(as_string(require(j, "type", where), where + ".type"));
      } catch (const ModelError& e) {
        throw ModelError(fmt::format("{}: {}", where, e.what()));
      }
      if (j.contains("origin")) {
        const json& o = j.at("origin");
        if (!o.is_object()) throw ModelError(where + ".origin: expected an object");
        if (o.contains("xyz")) spec.origin_xyz = as_vec3(o.at("xyz"), where + ".origin.xyz");
        if (o.contains("rpy")) spec.origin_rpy = as_vec3(o.at("rpy"), where + ".origin.rpy");
      }
      spec.axis = as_vec3(require(j, "axis", where), where + ".axis");
      joints.push_back(std::move(spec));
    }
  }

  Model model(base, std::move(links), std::move(joints), gravity);
  const auto report = validate(model);
  if (!report.empty()) {
    std::string msg = report.front();
    for (std::size_t i = 1; i < report.size(); ++i) msg += "; " + report[i];
    throw ModelError(msg);
  }
  return model;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError(fmt::format("cannot read model file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model(ss.str());
  } catch (const ModelError& e) {
    throw ModelError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string serialize_model(const Model& model) {
  json doc;
  doc["base"] = model.base_name();
  doc["gravity"] = vec_to_json(model.gravity());
  json links = json::array();
  for (const auto& l : model.links()) {
    const Mat3& r = l.inertia.rot_inertia();
    links.push_back({{"name", l.name},
                     {"mass", l.inertia.mass()},
                     {"com", vec_to_json(l.inertia.com())},
                     {"inertia", json::array({r(0, 0), r(0, 1), r(0, 2), r(1, 1), r(1, 2), r(2, 2)})}});
  }
  doc["links"] = std::move(links);
  json joints = json::array();
  for (const auto& j : model.joints()) {
    joints.push_back({{"name", j.name},
                      {"parent", j.parent},
                      {"child", j.child},
                      {"type", std::string(to_string(j.type))},
                      {"origin", {{"xyz", vec_to_json(j.origin_xyz)}, {"rpy", vec_to_json(j.origin_rpy)}}},
                      {"axis", vec_to_json(j.axis)}});
  }
  doc["joints"] = std::move(joints);
  return doc.dump(2) + "\n";
}

Model three_link(double d) {
  const Mat3 base_inertia = Vec3(1.0, 1.0, 4.0).asDiagonal();
  const Mat3 distal_inertia = Mat3::Identity();
  std::vector<LinkSpec> links{
      {"base", SpatialInertia::FromCentroidal(1.0, Vec3::Zero(), base_inertia)},
      {"link1", SpatialInertia::FromCentroidal(1.0, Vec3(d, 0.0, 0.0), distal_inertia)},
      {"link2", SpatialInertia::FromCentroidal(1.0, Vec3(d, 0.0, 0.0), distal_inertia)},
  };
  std::vector<JointSpec> joints(2);
  joints[0].name = "joint1";
  joints[0].parent = "base";
  joints[0].child = "link1";
  joints[0].origin_xyz = Vec3(-1.0, 0.0, 0.0);
  joints[0].origin_rpy = Vec3(0.0, 0.0, -std::numbers::pi / 2);
  joints[1].name = "joint2";
  joints[1].parent = "base";
  joints[1].child = "link2";
  joints[1].origin_xyz = Vec3(1.0, 0.0, 0.0);
  joints[1].origin_rpy = Vec3(0.0, 0.0, -std::numbers::pi / 2);
  return Model("base", std::move(links), std::move(joints));
}

Model rigid_body() {
  std::vector<LinkSpec> links{
      {"body", SpatialInertia::FromCentroidal(2.0, Vec3(0.1, -0.2, 0.05),
                                              Vec3(0.4, 0.7, 0.9).asDiagonal())}};
  return Model("body", std::move(links), {});
}

Model coaxial_chain(std::size_t n) {
  std::vector<LinkSpec> links;
  links.push_back({"base", SpatialInertia::FromCentroidal(2.0, Vec3(0.0, 0.0, 0.1),
                                                          Vec3(1.0, 1.0, 2.0).asDiagonal())});
  std::vector<JointSpec> joints;
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double radial = 0.3 + 0.1 * kk;
    links.push_back({fmt::format("link{}", k),
                     SpatialInertia::FromCentroidal(1.0 + 0.25 * kk, Vec3(0.0, 0.0, 0.25),
                                                    Vec3(radial, radial, 0.2 + 0.05 * kk).asDiagonal())});
    JointSpec j;
    j.name = fmt::format("joint{}", k);
    j.parent = k == 1 ? "base" : fmt::format("link{}", k - 1);
    j.child = fmt::format("link{}", k);
    j.origin_xyz = Vec3(0.0, 0.0, 0.5);
    joints.push_back(std::move(j));
  }
  return Model("base", std::move(links), std::move(joints));
}

namespace {

double parse_double(std::string_view text, const std::string& spec) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ModelError(fmt::format("bad number in model spec '{}'", spec));
  }
  return value;
}

}  // namespace

Model resolve_model(const std::string& spec) {
  constexpr std::string_view kThreeLink = "three-link:d=";
  constexpr std::string_view kCoaxial = "coaxial:n=";
  if (spec.rfind(kThreeLink, 0) == 0) {
    return three_link(parse_double(std::string_view(spec).substr(kThreeLink.size()), spec));
  }
  if (spec == "rigid-body") return rigid_body();
  if (spec.rfind(kCoaxial, 0) == 0) {
    const double n = parse_double(std::string_view(spec).substr(kCoaxial.size()), spec);
    if (n < 0 || n != std::floor(n)) throw ModelError(fmt::format("bad joint count in '{}'", spec));
    return coaxial_chain(static_cast<std::size_t>(n));
  }
  return load_model_file(spec);
}

}  // namespace ckit
