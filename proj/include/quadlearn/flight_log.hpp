#pragma once

#include <string>
#include <vector>

#include "quadlearn/dynamics.hpp"
#include "quadlearn/vec3.hpp"

namespace quadlearn {

/// One control step. Positions and velocities are the true plant values;
/// e and de are what the controller saw (including sensor noise).
struct FlightLogRow {
  double t = 0.0;
  Vec3 ref_position;
  Vec3 position;
  Vec3 ref_velocity;
  Vec3 velocity;
  HighLevelCommand command;
  Vec3 delta_u;
  Vec3 e;
  Vec3 de;
  bool guard = false;  // divergence guard active (weights frozen)
  bool clamp = false;  // an actuator or command clamp fired
  double step_us = 0.0;  // controller CPU time (thread clock); excluded from determinism checks

  friend bool operator==(const FlightLogRow&, const FlightLogRow&) = default;
};

struct FlightLog {
  double control_dt = 0.01;
  double settle_time = 3.0;  // rows with t < settle_time are excluded from metrics
  std::vector<FlightLogRow> rows;
  bool aborted = false;
  std::string abort_reason;
};

}  // namespace quadlearn
