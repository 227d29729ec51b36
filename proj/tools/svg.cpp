#include "svg.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include <centroidal_kit/kinematics.hpp>

namespace ckit::cli {

namespace {

struct Segment {
  Vec3 a, b;
};

struct Scene {
  std::vector<Segment> links;
  std::vector<Vec3> joints;
  std::vector<Vec3> link_coms;
  Vec3 com;
  Transform frame;
  Transform base;
};

constexpr double kAxis = 0.6;

Scene build(const Model& model, const Snapshot& s) {
  Scene sc;
  const auto poses = link_poses(model, s.state);
  for (std::size_t l = 0; l < model.link_count(); ++l) {
    const Vec3 c = poses[l].apply(model.links()[l].inertia.com());
    sc.link_coms.push_back(c);
    if (const auto j = model.parent_joint(l)) {
      sc.joints.push_back(poses[l].origin);
      sc.links.push_back({poses[model.joint_parent_link(*j)].origin, poses[l].origin});
      sc.links.push_back({poses[l].origin, c});
    }
  }
  sc.com = com(model, s.state);
  sc.frame = s.centroidal;
  sc.base = s.state.base_pose;
  return sc;
}

}  // namespace

std::vector<std::string> render_snapshots(const Model& model, const std::vector<Snapshot>& shots) {
  std::vector<Scene> scenes;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto grow = [&](const Vec3& p) {
    lo_x = std::min(lo_x, p.x());
    hi_x = std::max(hi_x, p.x());
    lo_y = std::min(lo_y, p.y());
    hi_y = std::max(hi_y, p.y());
  };
  for (const auto& s : shots) {
    scenes.push_back(build(model, s));
    const Scene& sc = scenes.back();
    for (const auto& seg : sc.links) {
      grow(seg.a);
      grow(seg.b);
    }
    for (const auto& c : sc.link_coms) grow(c);
    grow(sc.base.origin);
    for (int k = 0; k < 2; ++k) grow(sc.frame.apply(kAxis * Vec3::Unit(k)));
  }
  const double margin = 0.5;
  lo_x -= margin;
  lo_y -= margin;
  hi_x += margin;
  hi_y += margin;
  const double scale = 400.0 / std::max(hi_x - lo_x, hi_y - lo_y);
  const double width = (hi_x - lo_x) * scale, height = (hi_y - lo_y) * scale;
  // SVG y grows downwards.
  auto sx = [&](const Vec3& p) { return (p.x() - lo_x) * scale; };
  auto sy = [&](const Vec3& p) { return (hi_y - p.y()) * scale; };
  auto line = [&](const Vec3& a, const Vec3& b, const char* color, double w) {
    return fmt::format(
        "  <line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"{}\" "
        "stroke-width=\"{}\"/>\n",
        sx(a), sy(a), sx(b), sy(b), color, w);
  };
  auto circle = [&](const Vec3& c, double r, const char* fill) {
    return fmt::format(
        "  <circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{}\" fill=\"{}\" stroke=\"black\"/>\n",
        sx(c), sy(c), r, fill);
  };

  std::vector<std::string> out;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const Scene& sc = scenes[k];
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.3f} {1:.3f}\">\n"
        "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "  <text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"16\">t = {2:.2f} s</text>\n",
        width, height, shots[k].t);
    // Base link as a square around its frame origin.
    const Transform& b = sc.base;
    const Vec3 corners[4] = {b.apply({-0.4, -0.4, 0}), b.apply({0.4, -0.4, 0}),
                             b.apply({0.4, 0.4, 0}), b.apply({-0.4, 0.4, 0})};
    std::string poly;
    for (const auto& c : corners) poly += fmt::format("{:.3f},{:.3f} ", sx(c), sy(c));
    poly.pop_back();
    svg += fmt::format("  <polygon points=\"{}\" fill=\"#dddddd\" stroke=\"black\"/>\n", poly);
    for (const auto& seg : sc.links) svg += line(seg.a, seg.b, "#444444", 4);
    for (const auto& j : sc.joints) svg += circle(j, 4, "white");
    for (const auto& c : sc.link_coms) svg += circle(c, 5, "#888888");
    const Vec3 o = sc.frame.origin;
    svg += line(o, sc.frame.apply(kAxis * Vec3::UnitX()), "red", 3);
    svg += line(o, sc.frame.apply(kAxis * Vec3::UnitY()), "green", 3);
    svg += circle(sc.com, 6, "blue");
    svg += "</svg>\n";
    out.push_back(std::move(svg));
  }
  return out;
}

}  // namespace ckit::cli
