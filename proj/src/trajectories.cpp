#include "quadlearn/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quadlearn/error.hpp"

namespace quadlearn {

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Circle: return "circle";
    case TrajectoryKind::Eight: return "eight";
    case TrajectoryKind::Square: return "square";
  }
  return "circle";
}

std::string_view to_string(TrajectoryPlane plane) {
  switch (plane) {
    case TrajectoryPlane::XY: return "xy";
    case TrajectoryPlane::XZ: return "xz";
    case TrajectoryPlane::YZ: return "yz";
  }
  return "xy";
}

TrajectoryKind parse_trajectory_kind(std::string_view s) {
  if (s == "circle") return TrajectoryKind::Circle;
  if (s == "eight") return TrajectoryKind::Eight;
  if (s == "square") return TrajectoryKind::Square;
  throw Error(ErrorCode::ConfigError, "unknown trajectory kind '" + std::string(s) + "'");
}

TrajectoryPlane parse_trajectory_plane(std::string_view s) {
  if (s == "xy") return TrajectoryPlane::XY;
  if (s == "xz") return TrajectoryPlane::XZ;
  if (s == "yz") return TrajectoryPlane::YZ;
  throw Error(ErrorCode::ConfigError, "unknown trajectory plane '" + std::string(s) + "'");
}

void TrajectorySpec::validate() const {
  if (!(size > 0.0) || !(speed > 0.0) || !(duration >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "trajectory size and speed must be positive");
  }
}

namespace {

Vec3 embed(TrajectoryPlane plane, double a, double b) {
  switch (plane) {
    case TrajectoryPlane::XY: return {a, b, 0.0};
    case TrajectoryPlane::XZ: return {a, 0.0, b};
    case TrajectoryPlane::YZ: return {0.0, a, b};
  }
  return {a, b, 0.0};
}

double eight_rate(const TrajectorySpec& spec) {
  // Peak speed of the Gerono lemniscate is size * w * sqrt(2), reached at the crossing.
  return spec.speed / (spec.size * std::numbers::sqrt2);
}

}  // namespace

double lap_period(const TrajectorySpec& spec) {
  switch (spec.kind) {
    case TrajectoryKind::Circle: return 2.0 * std::numbers::pi * spec.size / spec.speed;
    case TrajectoryKind::Eight: return 2.0 * std::numbers::pi / eight_rate(spec);
    case TrajectoryKind::Square: return 4.0 * spec.size / spec.speed;
  }
  return 0.0;
}

ReferencePoint sample(const TrajectorySpec& spec, double t) {
  if (!(t >= 0.0 && t <= spec.duration)) {
    throw Error(ErrorCode::OutOfRange, "trajectory time " + std::to_string(t) + " outside [0, " +
                                           std::to_string(spec.duration) + "]");
  }
  double a = 0.0, b = 0.0, va = 0.0, vb = 0.0;
  switch (spec.kind) {
    case TrajectoryKind::Circle: {
      const double w = spec.speed / spec.size;
      a = spec.size * std::cos(w * t);
      b = spec.size * std::sin(w * t);
      va = -spec.size * w * std::sin(w * t);
      vb = spec.size * w * std::cos(w * t);
      break;
    }
    case TrajectoryKind::Eight: {
      const double w = eight_rate(spec);
      const double s = std::sin(w * t), c = std::cos(w * t);
      a = spec.size * s;
      b = spec.size * s * c;
      va = spec.size * w * c;
      vb = spec.size * w * std::cos(2.0 * w * t);
      break;
    }
    case TrajectoryKind::Square: {
      // Counter-clockwise from the (-h, -h) corner: +a, +b, -a, -b edges.
      const double h = spec.size / 2.0;
      const double perimeter = 4.0 * spec.size;
      const double dist = std::fmod(spec.speed * t, perimeter);
      const int edge = std::min(3, static_cast<int>(std::floor(dist / spec.size)));
      const double along = dist - edge * spec.size;
      switch (edge) {
        case 0: a = -h + along; b = -h; va = spec.speed; break;
        case 1: a = h; b = -h + along; vb = spec.speed; break;
        case 2: a = h - along; b = h; va = -spec.speed; break;
        default: a = -h; b = h - along; vb = -spec.speed; break;
      }
      break;
    }
  }
  return {spec.center + embed(spec.plane, a, b), embed(spec.plane, va, vb)};
}

ReferencePoint flight_reference(const TrajectorySpec& spec, double settle, double flight_time) {
  if (flight_time < settle) return {sample(spec, 0.0).position, Vec3{}};
  return sample(spec, std::min(flight_time - settle, spec.duration));
}

QuadState initial_state(const TrajectorySpec& spec) {
  QuadState s;
  s.position = sample(spec, 0.0).position;
  s.position.z = spec.takeoff_altitude;
  return s;
}

Vec3 tracking_error(const ReferencePoint& ref, const Vec3& position) {
  return ref.position - position;
}

Vec3 error_rate(const ReferencePoint& ref, const Vec3& velocity) {
  return ref.velocity - velocity;
}

void AxisFeatureWindow::push(double error, double rate) {
  for (std::size_t i = kWindowDepth - 1; i > 0; --i) {
    e[i] = e[i - 1];
    de[i] = de[i - 1];
  }
  e[0] = error;
  de[0] = rate;
}

Features AxisFeatureWindow::features() const {
  return {e[0], e[1], e[2], de[0], de[1], de[2]};
}

}  // namespace quadlearn
