#pragma once

#include <array>
#include <string>
#include <string_view>

#include "quadlearn/dynamics.hpp"
#include "quadlearn/vec3.hpp"

namespace quadlearn {

enum class TrajectoryKind { Circle, Eight, Square };
enum class TrajectoryPlane { XY, XZ, YZ };

std::string_view to_string(TrajectoryKind kind);
std::string_view to_string(TrajectoryPlane plane);
TrajectoryKind parse_trajectory_kind(std::string_view s);
TrajectoryPlane parse_trajectory_plane(std::string_view s);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Circle;
  TrajectoryPlane plane = TrajectoryPlane::XY;
  double size = 1.0;   // radius (circle, eight) or side length (square), m
  double speed = 1.0;  // m/s; peak speed for the eight
  Vec3 center{0.0, 0.0, 1.0};
  double duration = 30.0;          // s
  double takeoff_altitude = 1.0;   // m, initial height before settling

  void validate() const;
};

struct ReferencePoint {
  Vec3 position;
  Vec3 velocity;
};

/// Time for one full lap of the closed curve.
double lap_period(const TrajectorySpec& spec);

/// Reference at t in [0, duration]; OutOfRange otherwise. Square corners take
/// the outgoing edge's velocity.
ReferencePoint sample(const TrajectorySpec& spec, double t);

/// Reference for a full flight: hover at sample(spec, 0) for `settle` seconds,
/// then the trajectory itself.
ReferencePoint flight_reference(const TrajectorySpec& spec, double settle, double flight_time);

/// Initial plant state for a flight: at rest below the start point at the
/// takeoff altitude.
QuadState initial_state(const TrajectorySpec& spec);

Vec3 tracking_error(const ReferencePoint& ref, const Vec3& position);
Vec3 error_rate(const ReferencePoint& ref, const Vec3& velocity);

inline constexpr std::size_t kWindowDepth = 3;
inline constexpr std::size_t kFeatureCount = 2 * kWindowDepth;
using Features = std::array<double, kFeatureCount>;

/// Last three errors and error rates of one axis, newest first.
struct AxisFeatureWindow {
  std::array<double, kWindowDepth> e{};
  std::array<double, kWindowDepth> de{};

  void push(double error, double rate);
  /// (e_k, e_k-1, e_k-2, de_k, de_k-1, de_k-2)
  Features features() const;

  friend bool operator==(const AxisFeatureWindow&, const AxisFeatureWindow&) = default;
};

inline AxisFeatureWindow push_window(AxisFeatureWindow window, double error, double rate) {
  window.push(error, rate);
  return window;
}

}  // namespace quadlearn
