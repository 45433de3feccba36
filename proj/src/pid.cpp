#include "quadlearn/pid.hpp"

#include <algorithm>

#include "quadlearn/error.hpp"

namespace quadlearn {

void PidGains::validate() const {
  for (const auto& a : axes) {
    if (a.kp < 0.0 || a.ki < 0.0 || a.kd < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "PID gains must be non-negative");
    }
    if (!(a.integral_clamp > 0.0) || !(a.output_clamp > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "PID clamps must be positive");
    }
  }
}

PidStepResult pid_step(const PidAxisGains& gains, PidState state, double e, double de, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  state.integral = std::clamp(state.integral + gains.ki * e * dt, -gains.integral_clamp,
                              gains.integral_clamp);
  const double raw = gains.kp * e + state.integral + gains.kd * de;
  return {std::clamp(raw, -gains.output_clamp, gains.output_clamp), state};
}

HighLevelCommand assemble_command(const AxisValues& u, const CommandLimits& limits) {
  HighLevelCommand cmd;
  cmd.pitch = std::clamp(u[0], -limits.tilt, limits.tilt);
  cmd.roll = std::clamp(-u[1], -limits.tilt, limits.tilt);
  cmd.vertical_velocity = std::clamp(u[2], -limits.vertical_velocity, limits.vertical_velocity);
  cmd.yaw = 0.0;
  return cmd;
}

AxisValues PidController::step(const Vec3& e, const Vec3& de, double dt) {
  AxisValues out{};
  for (std::size_t i = 0; i < kAxes; ++i) {
    const PidStepResult r = pid_step(gains_.axes[i], states_[i], e[i], de[i], dt);
    states_[i] = r.state;
    out[i] = r.command;
  }
  return out;
}

HighLevelCommand outer_loop_pid(const PidGains& gains, std::array<PidState, kAxes>& states,
                                const Vec3& e, const Vec3& de, double dt,
                                const CommandLimits& limits) {
  AxisValues out{};
  for (std::size_t i = 0; i < kAxes; ++i) {
    const PidStepResult r = pid_step(gains.axes[i], states[i], e[i], de[i], dt);
    states[i] = r.state;
    out[i] = r.command;
  }
  return assemble_command(out, limits);
}

}  // namespace quadlearn
