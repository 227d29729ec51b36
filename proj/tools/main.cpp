// centroidal-kit: flatness checks, holonomy experiments, simulation and
// momentum reports for floating-base mechanisms.
//
// Exit codes: 0 success / flat, 1 usage or model error, 2 non-flat verdict or
// failed check, 3 numerical blow-up.

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <centroidal_kit/centroidal.hpp>
#include <centroidal_kit/integrability.hpp>
#include <centroidal_kit/io.hpp>

#include "svg.hpp"

namespace fs = std::filesystem;
using namespace ckit;

namespace {

enum ExitCode : int { kOk = 0, kError = 1, kVerdict = 2, kNumerical = 3 };

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw std::invalid_argument(fmt::format("{}: '{}' is not a number", what, item));
    }
    out.push_back(v);
  }
  return out;
}

VecX parse_vector(const std::string& text, std::size_t n, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != n) {
    throw std::invalid_argument(fmt::format("{}: expected {} values, got {}", what, n, v.size()));
  }
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(n));
}

std::string join(const VecX& v, int digits = 6) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out += fmt::format("{}{:.{}g}", k ? ", " : "", v[k], digits);
  }
  return out;
}

Model load_model(const std::string& spec, const std::string& gravity) {
  Model model = resolve_model(spec);
  if (!gravity.empty()) model = model.with_gravity(Vec3(parse_vector(gravity, 3, "--gravity")));
  return model;
}

fs::path output_dir(const std::string& out) {
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  f << text;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_file(path, os.str());
  fmt::print("wrote {}\n", path.string());
}

FlatnessGrid parse_grid(const std::string& text, const Model& model) {
  if (text.find(':') == std::string::npos) {
    const auto v = parse_list(text, "--grid");
    if (v.size() != 1 || v[0] < 1 || v[0] != std::floor(v[0])) {
      throw std::invalid_argument("--grid: expected a point count or lo:hi:count ranges");
    }
    return default_grid(model, static_cast<std::size_t>(v[0]));
  }
  std::vector<AxisRange> axes;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::replace(item.begin(), item.end(), ':', ',');
    const auto v = parse_list(item, "--grid");
    if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) {
      throw std::invalid_argument("--grid: ranges are lo:hi:count");
    }
    axes.push_back({v[0], v[1], static_cast<std::size_t>(v[2])});
  }
  if (axes.size() == 1) axes.resize(model.dof(), axes.front());
  if (axes.size() != model.dof()) {
    throw std::invalid_argument(
        fmt::format("--grid: {} ranges for {} joints", axes.size(), model.dof()));
  }
  return FlatnessGrid{axes};
}

// ---------------------------------------------------------------- commands

struct FlatnessArgs {
  std::string model, gravity, grid = "20", out;
  double h = 1e-4, tol = 1e-7;
  std::size_t threads = 0;
};

int cmd_check_flatness(const FlatnessArgs& a) {
  const Model model = load_model(a.model, a.gravity);
  const FlatnessReport r = flatness_report(model, parse_grid(a.grid, model), a.tol, a.h, a.threads);
  fmt::print("model: {} ({} joints)\n", a.model, model.dof());
  fmt::print("grid points: {}, h = {:g}, tol = {:g}\n", r.grid.size(), r.h, r.tol);
  for (const auto& p : r.pairs) {
    fmt::print("max |B_{}{}| = {:.6e}\n", p.i + 1, p.j + 1, p.max_norm);
  }
  if (!r.pairs.empty()) {
    fmt::print("worst: B_{}{} at s = ({})\n", r.worst_i + 1, r.worst_j + 1, join(r.worst_sample));
  }
  fmt::print("verdict: {}\n", r.flat ? "flat" : "non-flat");
  if (!a.out.empty()) {
    const fs::path path = output_dir(a.out) / "flatness.json";
    write_file(path, flatness_report_json(model, r).dump(2) + "\n");
    fmt::print("wrote {}\n", path.string());
  }
  return r.flat ? kOk : kVerdict;
}

struct HolonomyArgs {
  std::string model, gravity, trajectory = "sinusoid:T=10", out;
  double dt = 1e-3;
  std::size_t snapshots = 0;
};

int cmd_holonomy(const HolonomyArgs& a) {
  const Model model = load_model(a.model, a.gravity);
  const ShapeTrajectory loop = resolve_shape_trajectory(a.trajectory, model.dof());
  const HolonomyResult r = holonomy(model, loop, a.dt);
  fmt::print("model: {} ({} joints), loop: {} (T = {:g} s), dt = {:g}\n", a.model, model.dof(),
             a.trajectory, loop.duration(), a.dt);
  fmt::print("drift angle [rad]: {:.17g}\n", r.angle);
  fmt::print("origin displacement [m]: {:.17g}\n", r.origin_distance);
  fmt::print("max CoM drift in C [m]: {:.17g}\n", r.com_drift);

  if (a.out.empty() && a.snapshots == 0) return kOk;
  const fs::path dir = output_dir(a.out);
  const MotionSource motion = shape_only_motion(loop, Transform::Identity());
  auto sample_at = [&](const CentroidalSample& c) {
    const MotionSample m = motion(c.t);
    return TrajectorySample{c.t, m.state, m.velocity, c.pose};
  };
  if (!a.out.empty()) {
    std::vector<TrajectorySample> samples;
    samples.reserve(r.frames.size());
    for (const auto& c : r.frames) samples.push_back(sample_at(c));
    write_csv(dir / "centroidal.csv",
              [&](std::ostream& os) { write_centroidal_csv(os, model, samples); });
  }
  if (a.snapshots > 0) {
    std::vector<cli::Snapshot> shots;
    for (std::size_t k = 0; k < a.snapshots; ++k) {
      const double t = a.snapshots == 1 ? 0.0
                                        : loop.duration() * static_cast<double>(k) /
                                              static_cast<double>(a.snapshots - 1);
      // Nearest integrated sample.
      const auto it = std::min_element(r.frames.begin(), r.frames.end(),
                                       [t](const auto& x, const auto& y) {
                                         return std::abs(x.t - t) < std::abs(y.t - t);
                                       });
      shots.push_back({it->t, motion(it->t).state, it->pose});
    }
    const auto docs = cli::render_snapshots(model, shots);
    for (std::size_t k = 0; k < docs.size(); ++k) {
      const fs::path path = dir / fmt::format("snapshot_{:02d}.svg", k);
      write_file(path, docs[k]);
      fmt::print("wrote {} (t = {:.3f} s)\n", path.string(), shots[k].t);
    }
  }
  return kOk;
}

struct SimArgs {
  std::string model, gravity, out, v, s, sdot, wrench, wrench_at, wrench_window;
  double dt = 1e-3, t_end = 10.0;
  std::optional<unsigned> random_ic;
  std::size_t stride = 1;
  bool check = false;
};

struct Scenario {
  State state;
  VelocityState velocity;
  std::vector<ExternalWrench> wrenches;
  double w_start = 0.0, w_end = std::numeric_limits<double>::infinity();
};

Scenario make_scenario(const Model& model, const SimArgs& a) {
  const std::size_t n = model.dof();
  Scenario sc{zero_state(model), zero_velocity(model), {}};
  if (a.random_ic) {
    std::mt19937_64 rng(*a.random_ic);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec6 v;
    for (auto& x : v) x = u(rng);
    sc.velocity.base_velocity = SpatialMotion(v);
    for (std::size_t k = 0; k < n; ++k) {
      sc.state.shape[static_cast<Eigen::Index>(k)] = 3.0 * u(rng);
      sc.velocity.shape_rate[static_cast<Eigen::Index>(k)] = u(rng);
    }
  }
  if (!a.v.empty()) sc.velocity.base_velocity = SpatialMotion(Vec6(parse_vector(a.v, 6, "--v")));
  if (!a.s.empty()) sc.state.shape = parse_vector(a.s, n, "--s");
  if (!a.sdot.empty()) sc.velocity.shape_rate = parse_vector(a.sdot, n, "--sdot");
  if (!a.wrench.empty()) {
    const auto colon = a.wrench.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("--wrench: expected link:fx,fy,fz,tx,ty,tz");
    }
    ExternalWrench w;
    w.link = a.wrench.substr(0, colon);
    model.link_index(w.link);
    w.wrench = SpatialForce(Vec6(parse_vector(a.wrench.substr(colon + 1), 6, "--wrench")));
    if (!a.wrench_at.empty()) {
      w.contact_frame = Transform::Translation(Vec3(parse_vector(a.wrench_at, 3, "--wrench-at")));
    }
    sc.wrenches.push_back(w);
    if (!a.wrench_window.empty()) {
      const VecX win = parse_vector(a.wrench_window, 2, "--wrench-window");
      sc.w_start = win[0];
      sc.w_end = win[1];
    }
  }
  return sc;
}

std::vector<ExternalWrench> active_wrenches(const Scenario& sc, double t) {
  if (t >= sc.w_start && t < sc.w_end) return sc.wrenches;
  return {};
}

// Unforced: relative drift of J_A and J_G.  Forced: central differences of J_A
// against the momentum rate at interior samples away from wrench switches.
bool check_momentum(const Model& model, const Scenario& sc,
                    const std::vector<TrajectorySample>& traj) {
  const bool unforced = model.gravity().norm() == 0.0 && sc.wrenches.empty();
  if (unforced) {
    bool ok = true;
    for (FrameTag f : {FrameTag::kA, FrameTag::kG}) {
      const Vec6 j0 = total_momentum(model, traj.front().state, traj.front().velocity, f).value();
      double drift = 0.0;
      for (const auto& s : traj) {
        drift = std::max(drift, (total_momentum(model, s.state, s.velocity, f).value() - j0).norm());
      }
      const double rel = drift / std::max(j0.norm(), 1e-9);
      const bool pass = rel <= 1e-6;
      fmt::print("conservation J_{}: relative drift {:.3e} ({})\n", to_string(f), rel,
                 pass ? "ok" : "FAILED");
      ok = ok && pass;
    }
    return ok;
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double t0 = traj[k - 1].t, t1 = traj[k + 1].t;
    if ((t0 < sc.w_start && t1 >= sc.w_start) || (t0 < sc.w_end && t1 >= sc.w_end)) continue;
    const Vec6 fd = (total_momentum(model, traj[k + 1].state, traj[k + 1].velocity, FrameTag::kA).value() -
                     total_momentum(model, traj[k - 1].state, traj[k - 1].velocity, FrameTag::kA).value()) /
                    (t1 - t0);
    const Vec6 rate = momentum_rate(model, traj[k].state, traj[k].velocity, VecX::Zero(0),
                                    active_wrenches(sc, traj[k].t));
    worst = std::max(worst, (fd - rate).norm() / std::max(rate.norm(), 1.0));
  }
  const bool pass = worst <= 1e-5;
  fmt::print("momentum rate vs d/dt J_A: max relative error {:.3e} ({})\n", worst,
             pass ? "ok" : "FAILED");
  return pass;
}

int cmd_simulate(const SimArgs& a, bool momentum_only) {
  const Model model = load_model(a.model, a.gravity);
  const Scenario sc = make_scenario(model, a);
  SimulationOptions opt;
  opt.dt = a.dt;
  opt.t_end = a.t_end;
  opt.stride = a.check ? 1 : a.stride;
  if (!sc.wrenches.empty()) opt.wrenches = [&sc](double t) { return active_wrenches(sc, t); };
  const auto traj = simulate_with_centroidal_frame(model, sc.state, sc.velocity, opt);

  const auto& first = traj.front();
  const auto& last = traj.back();
  fmt::print("model: {} ({} joints), t_end = {:g} s, dt = {:g}, samples = {}\n", a.model,
             model.dof(), a.t_end, a.dt, traj.size());
  for (const auto* s : {&first, &last}) {
    fmt::print("t = {:g}: J_A = ({})\n", s->t,
               join(total_momentum(model, s->state, s->velocity, FrameTag::kA).value()));
    fmt::print("t = {:g}: J_G = ({})\n", s->t,
               join(total_momentum(model, s->state, s->velocity, FrameTag::kG).value()));
  }
  fmt::print("v_ave(0) = ({})\n", join(average_velocity(model, first.state, first.velocity).vector()));

  if (!a.out.empty()) {
    const fs::path dir = output_dir(a.out);
    // The conservation check needs every step; thin the output afterwards.
    std::vector<TrajectorySample> kept;
    const std::size_t thin = opt.stride == 1 ? std::max<std::size_t>(a.stride, 1) : 1;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (k % thin == 0 || k + 1 == traj.size()) kept.push_back(traj[k]);
    }
    if (!momentum_only) {
      write_csv(dir / "trajectory.csv", [&](std::ostream& os) { write_dynamics_csv(os, model, kept); });
      write_csv(dir / "centroidal.csv",
                [&](std::ostream& os) { write_centroidal_csv(os, model, kept); });
    }
    write_csv(dir / "momentum.csv", [&](std::ostream& os) { write_momentum_csv(os, model, kept); });
  }
  if (a.check) return check_momentum(model, sc, traj) ? kOk : kVerdict;
  return kOk;
}

struct InfoArgs {
  std::string model, gravity;
  bool dump = false;
};

int cmd_info(const InfoArgs& a) {
  const Model model = load_model(a.model, a.gravity);
  fmt::print("base: {}\n", model.base_name());
  fmt::print("links: {}, joints: {}, total mass: {:g} kg\n", model.link_count(), model.dof(),
             model.total_mass());
  fmt::print("gravity: ({})\n", join(model.gravity()));
  for (const auto& j : model.joints()) {
    fmt::print("  joint {}: {} -> {} ({}, axis ({}))\n", j.name, j.parent, j.child,
               to_string(j.type), join(j.axis));
  }
  fmt::print("CoM at s = 0 (base frame): ({})\n", join(com_in_base(model, VecX::Zero(static_cast<Eigen::Index>(model.dof())))));
  fmt::print("model hash: {:016x}\n", model_hash(model));
  const auto issues = validate(model);
  for (const auto& i : issues) fmt::print("issue: {}\n", i);
  if (a.dump) fmt::print("{}\n", serialize_model(model));
  return issues.empty() ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centroidal momentum, centroidal frame and integrability toolkit"};
  app.require_subcommand(1);

  auto add_model = [](CLI::App* sub, std::string& model, std::string& gravity) {
    sub->add_option("--model", model,
                    "Model file or builtin: three-link:d=<v>, rigid-body, coaxial:n=<k>")
        ->required();
    sub->add_option("--gravity", gravity, "Gravity override x,y,z [m/s^2]");
  };

  FlatnessArgs fa;
  auto* flat = app.add_subcommand("check-flatness", "Sample the curvature over a shape grid");
  flat->set_help_flag("--help", "Print this help message and exit");
  add_model(flat, fa.model, fa.gravity);
  flat->add_option("--grid", fa.grid, "Points per axis, or lo:hi:count[,lo:hi:count...]");
  flat->add_option("--h", fa.h, "Central-difference step")->check(CLI::PositiveNumber);
  flat->add_option("--tol", fa.tol, "Flatness tolerance on |B_ij|")->check(CLI::NonNegativeNumber);
  flat->add_option("--threads", fa.threads, "Worker threads (0: CENTROIDAL_KIT_THREADS or all)");
  flat->add_option("--out", fa.out, "Directory for flatness.json");

  HolonomyArgs ha;
  auto* hol = app.add_subcommand("holonomy", "Centroidal frame drift over a closed shape loop");
  add_model(hol, ha.model, ha.gravity);
  hol->add_option("--trajectory", ha.trajectory, "sinusoid:T=<s> or a delimited file");
  hol->add_option("--dt", ha.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  hol->add_option("--snapshots", ha.snapshots, "Number of evenly spaced SVG snapshots");
  hol->add_option("--out", ha.out, "Output directory");

  SimArgs sa;
  auto add_sim = [&](CLI::App* sub) {
    add_model(sub, sa.model, sa.gravity);
    sub->add_option("--dt", sa.dt, "Integration step [s]")->check(CLI::PositiveNumber);
    sub->add_option("--t-end", sa.t_end, "Final time [s]")->check(CLI::PositiveNumber);
    sub->add_option("--v", sa.v, "Initial base body velocity vx,vy,vz,wx,wy,wz");
    sub->add_option("--s", sa.s, "Initial shape");
    sub->add_option("--sdot", sa.sdot, "Initial joint rates");
    sub->add_option("--random-ic", sa.random_ic, "Seed for random initial conditions");
    sub->add_option("--wrench", sa.wrench, "External wrench link:fx,fy,fz,tx,ty,tz (mixed frame)");
    sub->add_option("--wrench-at", sa.wrench_at, "Contact point in the link frame x,y,z");
    sub->add_option("--wrench-window", sa.wrench_window, "Active interval t0,t1 [s]");
    sub->add_option("--stride", sa.stride, "Write every k-th step")->check(CLI::PositiveNumber);
    sub->add_flag("--check-conservation", sa.check, "Check momentum conservation / evolution");
    sub->add_option("--out", sa.out, "Output directory");
  };
  auto* sim = app.add_subcommand("simulate", "Forward dynamics with the centroidal frame");
  add_sim(sim);
  auto* mom = app.add_subcommand("momentum", "Momentum and average velocity along a simulation");
  add_sim(mom);

  InfoArgs ia;
  auto* info = app.add_subcommand("info", "Summarize and validate a model");
  add_model(info, ia.model, ia.gravity);
  info->add_flag("--dump", ia.dump, "Print the serialized model document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*flat) return cmd_check_flatness(fa);
    if (*hol) return cmd_holonomy(ha);
    if (*sim) return cmd_simulate(sa, false);
    if (*mom) return cmd_simulate(sa, true);
    if (*info) return cmd_info(ia);
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {} (t = {:.17g})\n", e.what(), e.time());
    return kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kError;
  }
  return kError;
}
