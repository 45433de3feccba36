#include "quadlearn/learning.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "quadlearn/error.hpp"

namespace quadlearn {

void PlantConfig::validate() const {
  params.validate();
  timing.validate();
  if (!(limits.tilt > 0.0) || !(limits.vertical_velocity > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "command limits must be positive");
  }
  if (settle_time < 0.0) throw Error(ErrorCode::InvalidArgument, "settle time must be >= 0");
}

void OnlineConfig::validate() const {
  fuzzy.validate();
  if (buffer_capacity < 1) throw Error(ErrorCode::InvalidArgument, "buffer capacity must be >= 1");
  if (cadence < 1) throw Error(ErrorCode::InvalidArgument, "update cadence must be >= 1");
  if (!(divergence_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "divergence threshold must be positive");
  }
}

ControlDecision PidOuterController::step(const ReferencePoint& ref, const Measurement& meas) {
  ControlDecision d;
  d.axis_outputs = pid_.step(tracking_error(ref, meas.position), error_rate(ref, meas.velocity), dt_);
  return d;
}

ControlDecision FrozenNetworkController::step(const ReferencePoint& ref, const Measurement& meas) {
  const Vec3 e = tracking_error(ref, meas.position);
  const Vec3 de = error_rate(ref, meas.velocity);
  ControlDecision d;
  for (std::size_t a = 0; a < kAxes; ++a) {
    windows_[a].push(e[a], de[a]);
    d.axis_outputs[a] = model_.nets[a].forward(windows_[a].features());
  }
  return d;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : ring_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "buffer capacity must be >= 1");
}

void ReplayBuffer::push(const TrainingSample& sample) {
  ring_[head_] = sample;
  head_ = (head_ + 1) % ring_.size();
  if (count_ < ring_.size()) ++count_;
}

std::vector<TrainingSample> ReplayBuffer::samples() const {
  std::vector<TrainingSample> out;
  out.reserve(count_);
  const std::size_t start = (head_ + ring_.size() - count_) % ring_.size();
  for (std::size_t i = 0; i < count_; ++i) out.push_back(ring_[(start + i) % ring_.size()]);
  return out;
}

OnlineLearner::OnlineLearner(ControllerModel model, OnlineConfig online, TrainerConfig trainer,
                             CommandLimits limits)
    : model_(std::move(model)),
      anchor_(model_),
      online_(online),
      trainer_(trainer),
      limits_(limits),
      buffers_{ReplayBuffer(online.buffer_capacity), ReplayBuffer(online.buffer_capacity),
               ReplayBuffer(online.buffer_capacity)} {
  online_.validate();
  trainer_.validate();
}

OnlineStepResult OnlineLearner::online_step(const ReferencePoint& ref, const Measurement& meas) {
  const auto deadline =
      ThreadCpuClock::now() +
      std::chrono::duration_cast<ThreadCpuClock::duration>(
          std::chrono::duration<double, std::milli>(trainer_.online_budget_ms));
  const Vec3 e = tracking_error(ref, meas.position);
  const Vec3 de = error_rate(ref, meas.velocity);

  for (std::size_t a = 0; a < kAxes; ++a) {
    if (!(std::abs(e[a]) <= online_.divergence_threshold)) frozen_ = true;
  }

  OnlineStepResult result;
  const Vec3 delta_u = fuzzy_mapping(e, de, online_.fuzzy);
  for (std::size_t a = 0; a < kAxes; ++a) {
    windows_[a].push(e[a], de[a]);
    const Features features = windows_[a].features();
    const double u = model_.nets[a].forward(features);
    // A correction that pushes further into the command clamp cannot change
    // the applied command; dropping it keeps the network from winding up.
    const double limit = a == 2 ? limits_.vertical_velocity : limits_.tilt;
    const bool windup = (u >= limit && delta_u[a] > 0.0) || (u <= -limit && delta_u[a] < 0.0);
    buffers_[a].push({features, windup ? u : u + delta_u[a]});
    result.decision.axis_outputs[a] = online_.apply_correction ? u + delta_u[a] : u;
  }
  result.decision.delta_u = delta_u;
  result.decision.guard = frozen_;

  ++steps_;
  if (!frozen_ && steps_ % online_.cadence == 0) {
    result.trained = true;
    // The budget covers the whole step; rotate the starting axis so none is starved.
    for (std::size_t i = 0; i < kAxes; ++i) {
      const std::size_t a = (steps_ + i) % kAxes;
      const std::vector<TrainingSample> batch = buffers_[a].samples();
      TrainResult r =
          train_quasi_newton(model_.nets[a], batch, trainer_, TrainMode::Online, deadline,
                             anchor_.nets[a].parameters());
      result.train_status[a] = r.status;
      result.iterations[a] = r.iterations;
      // NonFinite leaves the pre-step weights in r.net already.
      model_.nets[a] = std::move(r.net);
    }
  }
  return result;
}

ControlDecision OnlineLearner::step(const ReferencePoint& ref, const Measurement& meas) {
  return online_step(ref, meas).decision;
}

namespace {

std::size_t control_steps(const PlantConfig& plant, const TrajectorySpec& trajectory) {
  if (!(trajectory.duration > 0.0)) return 0;
  const double total = plant.settle_time + trajectory.duration;
  return static_cast<std::size_t>(std::floor(total / plant.timing.control_dt + 1e-9)) + 1;
}

}  // namespace

FlightLog fly(const PlantConfig& plant_config, const Disturbance& dist,
              const TrajectorySpec& trajectory, OuterController& controller) {
  using Clock = ThreadCpuClock;
  plant_config.validate();
  trajectory.validate();

  FlightLog log;
  log.control_dt = plant_config.timing.control_dt;
  log.settle_time = plant_config.settle_time;
  const std::size_t n = control_steps(plant_config, trajectory);
  log.rows.reserve(n);

  Plant plant(plant_config.params, plant_config.inner, dist, plant_config.timing,
              initial_state(trajectory));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * plant_config.timing.control_dt;
    FlightLogRow row;
    row.t = t;
    const ReferencePoint ref = flight_reference(trajectory, plant_config.settle_time, t);
    const Measurement meas = plant.measure();
    row.ref_position = ref.position;
    row.ref_velocity = ref.velocity;
    row.position = plant.state().position;
    row.velocity = plant.state().velocity;
    row.e = tracking_error(ref, meas.position);
    row.de = error_rate(ref, meas.velocity);

    try {
      const auto start = Clock::now();
      const ControlDecision decision = controller.step(ref, meas);
      const auto stop = Clock::now();
      row.step_us = std::chrono::duration<double, std::micro>(stop - start).count();
      row.command = assemble_command(decision.axis_outputs, plant_config.limits);
      row.delta_u = decision.delta_u;
      row.guard = decision.guard;
      row.clamp = row.command.pitch != decision.axis_outputs[0] ||
                  row.command.roll != -decision.axis_outputs[1] ||
                  row.command.vertical_velocity != decision.axis_outputs[2];
      log.rows.push_back(row);
      if (plant.apply(row.command)) log.rows.back().clamp = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GimbalLock && e.code() != ErrorCode::NonFinite) throw;
      log.aborted = true;
      log.abort_reason = e.what();
      break;
    }
  }
  return log;
}

Dataset collect_offline(const PlantConfig& plant_config, const Disturbance& dist,
                        const PidGains& gains, const std::vector<TrajectorySpec>& trajectories,
                        std::size_t n_samples, std::uint64_t seed) {
  plant_config.validate();
  if (trajectories.empty()) throw Error(ErrorCode::InvalidArgument, "no trajectories to fly");
  for (const auto& tr : trajectories) {
    tr.validate();
    if (!(tr.duration > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "collection trajectories need a positive duration");
    }
  }

  Dataset data;
  data.provenance["controller"] = "pid";
  data.provenance["seed"] = std::to_string(seed);
  data.provenance["samples"] = std::to_string(n_samples);
  std::string specs;
  for (const auto& tr : trajectories) {
    if (!specs.empty()) specs += ';';
    specs += std::string(to_string(tr.kind)) + "/" + std::string(to_string(tr.plane)) +
             "/size=" + std::to_string(tr.size) + "/speed=" + std::to_string(tr.speed);
  }
  data.provenance["trajectories"] = specs;

  const double dt = plant_config.timing.control_dt;
  for (std::size_t flight = 0; data.rows_per_axis() < n_samples; ++flight) {
    const TrajectorySpec& tr = trajectories[flight % trajectories.size()];
    Disturbance flight_dist = dist;
    flight_dist.seed = seed + flight;
    Plant plant(plant_config.params, plant_config.inner, flight_dist, plant_config.timing,
                initial_state(tr));
    PidController pid(gains);
    std::array<AxisFeatureWindow, kAxes> windows{};

    const std::size_t steps = control_steps(plant_config, tr);
    for (std::size_t k = 0; k < steps && data.rows_per_axis() < n_samples; ++k) {
      const double t = static_cast<double>(k) * dt;
      const ReferencePoint ref = flight_reference(tr, plant_config.settle_time, t);
      const Measurement meas = plant.measure();
      const Vec3 e = tracking_error(ref, meas.position);
      const Vec3 de = error_rate(ref, meas.velocity);
      const AxisValues u = pid.step(e, de, dt);
      for (std::size_t a = 0; a < kAxes; ++a) windows[a].push(e[a], de[a]);
      if (t >= plant_config.settle_time) {
        for (std::size_t a = 0; a < kAxes; ++a) {
          data.axes[a].push_back({windows[a].features(), u[a]});
        }
      }
      try {
        plant.apply(assemble_command(u, plant_config.limits));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::GimbalLock && err.code() != ErrorCode::NonFinite) throw;
        throw Error(ErrorCode::Unstable, "PID flight " + std::to_string(flight) + " aborted: " +
                                             err.what());
      }
    }
  }
  data.validate();
  return data;
}

PretrainResult pretrain(const Dataset& data, const NetworkArchitecture& arch,
                        const TrainerConfig& config) {
  data.validate();
  arch.validate();
  config.validate();

  PretrainResult result;
  result.model.provenance = data.provenance;
  result.model.provenance["trainer_seed"] = std::to_string(config.seed);
  result.model.provenance["random_search_candidates"] =
      std::to_string(config.random_search_candidates);
  result.model.provenance["max_iterations"] = std::to_string(config.max_iterations);

  for (std::size_t a = 0; a < kAxes; ++a) {
    std::vector<TrainingSample> train, heldout;
    const auto& samples = data.axes[a];
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (i % 5 == 4 ? heldout : train).push_back(samples[i]);
    }
    if (train.empty()) train = heldout;
    if (heldout.empty()) heldout = train;

    const ScalingParams scaling = ScalingParams::fit(train);
    TrainerConfig axis_config = config;
    axis_config.seed = config.seed + a;
    const AxisNetwork init = init_random_search(arch, scaling, train, axis_config);
    TrainResult trained = train_quasi_newton(init, train, axis_config, TrainMode::Offline);

    AxisTrainingReport& report = result.reports[a];
    report.iterations = trained.iterations;
    report.status = trained.status;
    report.loss_history = std::move(trained.loss_history);
    const LossValue train_loss = evaluate_nse(trained.net, train);
    const LossValue held_loss = evaluate_nse(trained.net, heldout);
    report.train_nse = train_loss.value;
    report.heldout_nse = held_loss.value;
    report.fallback = train_loss.fallback || held_loss.fallback;
    report.train_size = train.size();
    report.heldout_size = heldout.size();
    result.model.nets[a] = std::move(trained.net);
  }
  return result;
}

OnlineRunResult run_online(const PlantConfig& plant, const Disturbance& dist,
                           const ControllerModel& model, const TrajectorySpec& trajectory,
                           const OnlineConfig& online, const TrainerConfig& trainer) {
  OnlineLearner learner(model, online, trainer, plant.limits);
  OnlineRunResult result;
  result.log = fly(plant, dist, trajectory, learner);
  result.final_model = learner.model();
  result.final_model.provenance["post_trained"] = "true";
  result.guard_triggered = learner.frozen();
  return result;
}

}  // namespace quadlearn
