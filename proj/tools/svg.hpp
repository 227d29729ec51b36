#pragma once

#include <string>
#include <vector>

#include <centroidal_kit/model.hpp>

namespace ckit::cli {

struct Snapshot {
  double t = 0.0;
  State state;
  Transform centroidal;  // ^A H_C
};

/// Renders the x-y projection of each snapshot with a shared view box: links
/// as segments from joint anchor to center of mass, the total center of mass,
/// and the centroidal frame axes.  Returns the SVG documents in order.
std::vector<std::string> render_snapshots(const Model& model, const std::vector<Snapshot>& shots);

}  // namespace ckit::cli
