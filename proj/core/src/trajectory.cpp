#include "centroidal_kit/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace ckit {

double ShapeTrajectory::closure_gap() const {
  return (position(duration_) - position(0.0)).cwiseAbs().maxCoeff();
}

ShapeTrajectory ShapeTrajectory::Sinusoid(double period) {
  if (!(period > 0.0)) throw std::invalid_argument("sinusoid period must be positive");
  constexpr double pi = std::numbers::pi;
  const double w = 2.0 * pi / period;
  auto pos = [w](double t) {
    VecX s(2);
    s << 1.5 * pi * (std::cos(w * t) - 1.0), 0.5 * pi * std::sin(w * t);
    return s;
  };
  auto vel = [w](double t) {
    VecX s(2);
    s << -1.5 * pi * w * std::sin(w * t), 0.5 * pi * w * std::cos(w * t);
    return s;
  };
  return ShapeTrajectory(2, period, pos, vel);
}

ShapeTrajectory ShapeTrajectory::Fourier(const VecX& center, const MatX& amplitudes,
                                         const MatX& phases, double period) {
  if (amplitudes.rows() != center.size() || phases.rows() != center.size() ||
      phases.cols() != amplitudes.cols()) {
    throw std::invalid_argument("Fourier loop: inconsistent coefficient shapes");
  }
  const double w = 2.0 * std::numbers::pi / period;
  auto pos = [=](double t) {
    VecX s = center;
    for (Eigen::Index k = 0; k < amplitudes.cols(); ++k) {
      const double wk = w * static_cast<double>(k + 1);
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        s[i] += amplitudes(i, k) * std::sin(wk * t + phases(i, k));
      }
    }
    return s;
  };
  auto vel = [=](double t) {
    VecX s = VecX::Zero(center.size());
    for (Eigen::Index k = 0; k < amplitudes.cols(); ++k) {
      const double wk = w * static_cast<double>(k + 1);
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        s[i] += amplitudes(i, k) * wk * std::cos(wk * t + phases(i, k));
      }
    }
    return s;
  };
  return ShapeTrajectory(static_cast<std::size_t>(center.size()), period, pos, vel);
}

ShapeTrajectory ShapeTrajectory::Constant(const VecX& shape, double duration) {
  const VecX zero = VecX::Zero(shape.size());
  return ShapeTrajectory(static_cast<std::size_t>(shape.size()), duration,
                         [shape](double) { return shape; }, [zero](double) { return zero; });
}

ShapeTrajectory ShapeTrajectory::FromSamples(std::vector<double> times, std::vector<VecX> shapes,
                                             std::vector<VecX> rates) {
  const std::size_t n = times.size();
  if (n < 2 || shapes.size() != n) {
    throw std::invalid_argument("trajectory needs at least two samples");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument(fmt::format("trajectory times must increase (row {})", k + 1));
    }
  }
  if (rates.empty()) {
    rates.resize(n);
    rates[0] = (shapes[1] - shapes[0]) / (times[1] - times[0]);
    rates[n - 1] = (shapes[n - 1] - shapes[n - 2]) / (times[n - 1] - times[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      rates[k] = (shapes[k + 1] - shapes[k - 1]) / (times[k + 1] - times[k - 1]);
    }
  }
  const double t0 = times.front();
  // Time is measured from the first sample.
  for (double& t : times) t -= t0;
  const double duration = times.back();
  const auto dof = static_cast<std::size_t>(shapes.front().size());

  struct Data {
    std::vector<double> t;
    std::vector<VecX> s, r;
  };
  auto data = std::make_shared<const Data>(Data{std::move(times), std::move(shapes), std::move(rates)});

  auto locate = [data](double t) {
    const auto& ts = data->t;
    t = std::clamp(t, ts.front(), ts.back());
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t k = static_cast<std::size_t>(std::distance(ts.begin(), it));
    k = std::clamp<std::size_t>(k, 1, ts.size() - 1) - 1;
    return std::pair<std::size_t, double>(k, t);
  };
  auto pos = [data, locate](double t) {
    auto [k, tc] = locate(t);
    const double h = data->t[k + 1] - data->t[k];
    const double u = (tc - data->t[k]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return VecX(h00 * data->s[k] + h10 * h * data->r[k] + h01 * data->s[k + 1] +
                h11 * h * data->r[k + 1]);
  };
  auto vel = [data, locate](double t) {
    auto [k, tc] = locate(t);
    const double h = data->t[k + 1] - data->t[k];
    const double u = (tc - data->t[k]) / h;
    const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
    const double d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
    return VecX((d00 * data->s[k] + d01 * data->s[k + 1]) / h + d10 * data->r[k] +
                d11 * data->r[k + 1]);
  };
  return ShapeTrajectory(dof, duration, pos, vel);
}

namespace {

std::vector<std::string> split_fields(std::string line) {
  std::replace_if(line.begin(), line.end(),
                  [](char c) { return c == ',' || c == ';' || c == '\t' || c == '\r'; }, ' ');
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string f; ss >> f;) out.push_back(f);
  return out;
}

bool parse_number(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

ShapeTrajectory read_shape_trajectory(std::istream& in, std::size_t dof) {
  std::vector<double> times;
  std::vector<VecX> shapes, rates;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_number(fields[k], values[k]);
    if (!numeric) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw std::invalid_argument(fmt::format("trajectory row {}: non-numeric field", row));
    }
    first = false;
    const bool with_rates = values.size() == 1 + 2 * dof;
    if (values.size() != 1 + dof && !with_rates) {
      throw std::invalid_argument(fmt::format(
          "trajectory row {}: expected {} or {} columns, got {}", row, 1 + dof, 1 + 2 * dof,
          values.size()));
    }
    if (!times.empty() && (with_rates != !rates.empty())) {
      throw std::invalid_argument(fmt::format("trajectory row {}: inconsistent column count", row));
    }
    times.push_back(values[0]);
    shapes.push_back(Eigen::Map<const VecX>(values.data() + 1, static_cast<Eigen::Index>(dof)));
    if (with_rates) {
      rates.push_back(Eigen::Map<const VecX>(values.data() + 1 + dof, static_cast<Eigen::Index>(dof)));
    }
  }
  return ShapeTrajectory::FromSamples(std::move(times), std::move(shapes), std::move(rates));
}

ShapeTrajectory resolve_shape_trajectory(const std::string& spec, std::size_t dof) {
  if (spec == "sinusoid" || spec.rfind("sinusoid:", 0) == 0) {
    if (dof != 2) {
      throw std::invalid_argument("the sinusoid trajectory needs a model with two joints");
    }
    double period = 10.0;
    if (spec != "sinusoid") {
      const std::string_view rest = std::string_view(spec).substr(9);
      if (rest.rfind("T=", 0) != 0 || !parse_number(rest.substr(2), period)) {
        throw std::invalid_argument(fmt::format("bad trajectory spec '{}'", spec));
      }
    }
    return ShapeTrajectory::Sinusoid(period);
  }
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument(fmt::format("cannot read trajectory file '{}'", spec));
  return read_shape_trajectory(in, dof);
}

}  // namespace ckit
