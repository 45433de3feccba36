#pragma once

// Quadcopter rigid-body model and the simplified onboard attitude/velocity loop.
//
// Frames: z is up, thrust acts along +z of the body. Linear velocity is
// expressed in the world frame, angular rates (p, q, r) in the body frame.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "quadlearn/vec3.hpp"

namespace quadlearn {

struct QuadParams {
  double mass = 0.5;        // kg
  double gravity = 9.81;    // m/s^2
  double ix = 0.00389;      // kg m^2
  double iy = 0.00389;
  double iz = 0.00703;
  double thrust_max = 9.81;  // N, 2 m g for the default plant
  double torque_max = 0.05;  // N m

  void validate() const;
};

inline constexpr std::size_t kStateDim = 12;
using StateVector = std::array<double, kStateDim>;

struct QuadState {
  Vec3 position;  // x, y, z
  Vec3 attitude;  // phi, theta, psi
  Vec3 velocity;  // vx, vy, vz (world)
  Vec3 rates;     // p, q, r (body)

  StateVector to_vector() const;
  static QuadState from_vector(const StateVector& v);

  friend bool operator==(const QuadState&, const QuadState&) = default;
};

struct ActuatorInputs {
  double thrust = 0.0;      // N
  double torque_roll = 0.0;  // N m
  double torque_pitch = 0.0;
  double torque_yaw = 0.0;
};

struct HighLevelCommand {
  double pitch = 0.0;              // theta*, rad
  double roll = 0.0;               // phi*, rad
  double vertical_velocity = 0.0;  // w*, m/s
  double yaw = 0.0;                // psi*, rad

  friend bool operator==(const HighLevelCommand&, const HighLevelCommand&) = default;
};

struct MassChange {
  double time = 0.0;   // s
  double delta = 0.0;  // kg, relative to the nominal mass
};

struct Disturbance {
  Vec3 force;       // N, world frame
  Vec3 force_ramp;  // N/s, added linearly in time
  std::vector<MassChange> mass_schedule;  // sorted by time
  double position_noise_std = 0.0;  // m
  double velocity_noise_std = 0.0;  // m/s
  std::uint64_t seed = 0;

  /// Mass offset in effect at time t (latest schedule entry with time <= t).
  double mass_delta_at(double t) const;
  Vec3 force_at(double t) const { return force + t * force_ramp; }

  void validate(const QuadParams& params) const;
};

struct InnerGains {
  double kw = 4.0;          // vertical velocity gain, 1/s
  double k_attitude = 400.0;  // roll/pitch angle gain, 1/s^2
  double k_rate = 40.0;       // roll/pitch rate damping, 1/s
  double k_yaw = 16.0;
  double k_yaw_rate = 8.0;
};

/// Time-derivative of the 12-dimensional state. Throws GimbalLock when
/// |theta| >= pi/2 - 1e-3 and NonFinite on a non-finite result.
StateVector derivative(const QuadState& state, const ActuatorInputs& u, const QuadParams& params,
                       const Disturbance& dist, double t);

/// One classical fourth-order Runge-Kutta step of `derivative`.
QuadState step_rk4(const QuadState& state, const ActuatorInputs& u, const QuadParams& params,
                   const Disturbance& dist, double t, double dt);

struct InnerLoopOutput {
  ActuatorInputs inputs;
  bool clamped = false;
};

/// Cascaded attitude + rate-damping law with tilt-compensated thrust.
InnerLoopOutput inner_loop(const HighLevelCommand& cmd, const QuadState& state,
                           const QuadParams& params, const InnerGains& gains);

/// Clamps thrust to [0, thrust_max] and each torque to +-torque_max.
InnerLoopOutput clamp_inputs(const ActuatorInputs& u, const QuadParams& params);

struct SimTiming {
  double physics_dt = 1e-3;  // s
  double control_dt = 1e-2;  // s, must be an integer multiple of physics_dt

  int substeps() const;
  void validate() const;
};

/// Noisy state feedback available to the outer loop.
struct Measurement {
  Vec3 position;
  Vec3 velocity;
};

/// Plant simulator: holds the true state, runs the inner loop at the physics
/// rate under a zero-order-held high-level command, and samples noisy
/// feedback at the control rate. The inner loop sees the nominal parameters;
/// the plant integrates with the disturbed mass.
class Plant {
 public:
  Plant(QuadParams nominal, InnerGains gains, Disturbance dist, SimTiming timing,
        const QuadState& initial);

  Measurement measure();
  /// Advances one control period. Returns true if any actuator clamp fired.
  bool apply(const HighLevelCommand& cmd);

  const QuadState& state() const { return state_; }
  double time() const { return static_cast<double>(steps_) * timing_.physics_dt; }
  const QuadParams& nominal() const { return nominal_; }

 private:
  QuadParams nominal_;
  InnerGains gains_;
  Disturbance dist_;
  SimTiming timing_;
  QuadState state_;
  std::int64_t steps_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace quadlearn
