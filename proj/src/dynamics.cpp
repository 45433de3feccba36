#include "quadlearn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quadlearn/error.hpp"

namespace quadlearn {

namespace {

constexpr double kGimbalMargin = 1e-3;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

void QuadParams::validate() const {
  require(mass > 0.0, "mass must be positive");
  require(gravity > 0.0, "gravity must be positive");
  require(ix > 0.0 && iy > 0.0 && iz > 0.0, "inertia must be positive");
  require(thrust_max > mass * gravity, "thrust_max must exceed m*g");
  require(torque_max > 0.0, "torque_max must be positive");
}

StateVector QuadState::to_vector() const {
  return {position.x, position.y, position.z, attitude.x, attitude.y, attitude.z,
          velocity.x, velocity.y, velocity.z, rates.x,    rates.y,    rates.z};
}

QuadState QuadState::from_vector(const StateVector& v) {
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}, {v[9], v[10], v[11]}};
}

double Disturbance::mass_delta_at(double t) const {
  double delta = 0.0;
  for (const auto& change : mass_schedule) {
    if (change.time > t) break;
    delta = change.delta;
  }
  return delta;
}

void Disturbance::validate(const QuadParams& params) const {
  require(position_noise_std >= 0.0 && velocity_noise_std >= 0.0, "noise std must be >= 0");
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& change : mass_schedule) {
    require(change.time >= last, "mass schedule must be sorted by time");
    require(params.mass + change.delta > 0.0, "scheduled mass must stay positive");
    last = change.time;
  }
}

StateVector derivative(const QuadState& s, const ActuatorInputs& u, const QuadParams& params,
                       const Disturbance& dist, double t) {
  const double phi = s.attitude.x;
  const double theta = s.attitude.y;
  const double psi = s.attitude.z;
  if (!(std::abs(theta) < std::numbers::pi / 2.0 - kGimbalMargin)) {
    throw Error(ErrorCode::GimbalLock, "pitch approached +-pi/2");
  }

  const double sphi = std::sin(phi), cphi = std::cos(phi);
  const double sth = std::sin(theta), cth = std::cos(theta), tth = std::tan(theta);
  const double spsi = std::sin(psi), cpsi = std::cos(psi);
  const double p = s.rates.x, q = s.rates.y, r = s.rates.z;

  const double mass = params.mass + dist.mass_delta_at(t);
  const Vec3 force = dist.force_at(t);

  StateVector d{};
  d[0] = s.velocity.x;
  d[1] = s.velocity.y;
  d[2] = s.velocity.z;
  d[3] = p + sphi * tth * q + cphi * tth * r;
  d[4] = cphi * q - sphi * r;
  d[5] = (sphi / cth) * q + (cphi / cth) * r;
  d[6] = (cphi * cpsi * sth + sphi * spsi) * u.thrust / mass + force.x / mass;
  d[7] = (cphi * spsi * sth - cpsi * sphi) * u.thrust / mass + force.y / mass;
  d[8] = -params.gravity + cphi * cth * u.thrust / mass + force.z / mass;
  d[9] = (params.iy - params.iz) / params.ix * q * r + u.torque_roll / params.ix;
  d[10] = (params.iz - params.ix) / params.iy * p * r + u.torque_pitch / params.iy;
  d[11] = (params.ix - params.iy) / params.iz * p * q + u.torque_yaw / params.iz;

  for (double v : d) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "state derivative is not finite");
  }
  return d;
}

QuadState step_rk4(const QuadState& state, const ActuatorInputs& u, const QuadParams& params,
                   const Disturbance& dist, double t, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const StateVector x = state.to_vector();
  auto offset = [&x](const StateVector& k, double h) {
    StateVector out;
    for (std::size_t i = 0; i < kStateDim; ++i) out[i] = x[i] + h * k[i];
    return QuadState::from_vector(out);
  };
  const StateVector k1 = derivative(state, u, params, dist, t);
  const StateVector k2 = derivative(offset(k1, dt / 2), u, params, dist, t + dt / 2);
  const StateVector k3 = derivative(offset(k2, dt / 2), u, params, dist, t + dt / 2);
  const StateVector k4 = derivative(offset(k3, dt), u, params, dist, t + dt);
  StateVector next;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return QuadState::from_vector(next);
}

InnerLoopOutput clamp_inputs(const ActuatorInputs& u, const QuadParams& params) {
  InnerLoopOutput out;
  auto clamp = [&out](double v, double lo, double hi) {
    const double c = std::clamp(v, lo, hi);
    if (c != v) out.clamped = true;
    return c;
  };
  out.inputs.thrust = clamp(u.thrust, 0.0, params.thrust_max);
  out.inputs.torque_roll = clamp(u.torque_roll, -params.torque_max, params.torque_max);
  out.inputs.torque_pitch = clamp(u.torque_pitch, -params.torque_max, params.torque_max);
  out.inputs.torque_yaw = clamp(u.torque_yaw, -params.torque_max, params.torque_max);
  return out;
}

InnerLoopOutput inner_loop(const HighLevelCommand& cmd, const QuadState& state,
                           const QuadParams& params, const InnerGains& gains) {
  const double phi = state.attitude.x;
  const double theta = state.attitude.y;
  const double tilt = std::max(std::cos(phi) * std::cos(theta), 0.5);

  ActuatorInputs raw;
  raw.thrust =
      params.mass * (params.gravity + gains.kw * (cmd.vertical_velocity - state.velocity.z)) / tilt;
  raw.torque_roll = params.ix * (gains.k_attitude * (cmd.roll - phi) - gains.k_rate * state.rates.x);
  raw.torque_pitch =
      params.iy * (gains.k_attitude * (cmd.pitch - theta) - gains.k_rate * state.rates.y);
  raw.torque_yaw = params.iz * (gains.k_yaw * (cmd.yaw - state.attitude.z) -
                                gains.k_yaw_rate * state.rates.z);
  return clamp_inputs(raw, params);
}

int SimTiming::substeps() const {
  return static_cast<int>(std::lround(control_dt / physics_dt));
}

void SimTiming::validate() const {
  require(physics_dt > 0.0 && control_dt > 0.0, "time steps must be positive");
  const double ratio = control_dt / physics_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 && ratio >= 1.0,
          "control_dt must be an integer multiple of physics_dt");
}

Plant::Plant(QuadParams nominal, InnerGains gains, Disturbance dist, SimTiming timing,
             const QuadState& initial)
    : nominal_(nominal),
      gains_(gains),
      dist_(std::move(dist)),
      timing_(timing),
      state_(initial),
      rng_(dist_.seed) {
  nominal_.validate();
  dist_.validate(nominal_);
  timing_.validate();
}

Measurement Plant::measure() {
  Measurement m{state_.position, state_.velocity};
  if (dist_.position_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, dist_.position_noise_std);
    for (std::size_t i = 0; i < 3; ++i) m.position[i] += noise(rng_);
  }
  if (dist_.velocity_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, dist_.velocity_noise_std);
    for (std::size_t i = 0; i < 3; ++i) m.velocity[i] += noise(rng_);
  }
  return m;
}

bool Plant::apply(const HighLevelCommand& cmd) {
  bool clamped = false;
  const int n = timing_.substeps();
  for (int i = 0; i < n; ++i) {
    const InnerLoopOutput out = inner_loop(cmd, state_, nominal_, gains_);
    clamped = clamped || out.clamped;
    state_ = step_rk4(state_, out.inputs, nominal_, dist_, time(), timing_.physics_dt);
    ++steps_;
  }
  return clamped;
}

}  // namespace quadlearn
