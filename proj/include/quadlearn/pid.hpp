#pragma once

#include <array>

#include "quadlearn/dynamics.hpp"
#include "quadlearn/vec3.hpp"

namespace quadlearn {

inline constexpr std::size_t kAxes = 3;
using AxisValues = std::array<double, kAxes>;

struct PidAxisGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_clamp = 1.0;  // bound on the integral term, command units
  double output_clamp = 1.0;    // rad for x/y, m/s for z
};

struct PidGains {
  std::array<PidAxisGains, kAxes> axes{{
      {0.35, 0.02, 0.25, 0.15, 0.5},
      {0.35, 0.02, 0.25, 0.15, 0.5},
      {1.2, 0.1, 0.6, 1.0, 2.0},
  }};

  void validate() const;
};

/// Integral term accumulator, stored in command units (ki already applied).
struct PidState {
  double integral = 0.0;
};

struct PidStepResult {
  double command = 0.0;
  PidState state;
};

/// Parallel-form PID on measured error rate. The integral is advanced by
/// ki*e*dt and clamped before the command is formed.
PidStepResult pid_step(const PidAxisGains& gains, PidState state, double e, double de, double dt);

/// Limits applied when assembling a high-level command.
struct CommandLimits {
  double tilt = 0.5;               // rad
  double vertical_velocity = 2.0;  // m/s
};

/// Maps per-axis outputs to (theta*, phi*, w*): x -> +theta*, y -> -phi*,
/// z -> w*, each clamped. Yaw is held at zero.
HighLevelCommand assemble_command(const AxisValues& axis_outputs, const CommandLimits& limits);

/// Three independent axis PIDs.
class PidController {
 public:
  explicit PidController(PidGains gains) : gains_(gains) { gains_.validate(); }

  /// Raw per-axis outputs (pre-sign, pre-limit).
  AxisValues step(const Vec3& e, const Vec3& de, double dt);
  void reset() { states_ = {}; }
  const std::array<PidState, kAxes>& states() const { return states_; }

 private:
  PidGains gains_;
  std::array<PidState, kAxes> states_{};
};

HighLevelCommand outer_loop_pid(const PidGains& gains, std::array<PidState, kAxes>& states,
                                const Vec3& e, const Vec3& de, double dt,
                                const CommandLimits& limits);

}  // namespace quadlearn
