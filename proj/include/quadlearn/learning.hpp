#pragma once

// Offline pre-training from PID flights and the online fuzzy-supervised
// post-training loop.

#include <array>
#include <cstdint>
#include <vector>

#include "quadlearn/dynamics.hpp"
#include "quadlearn/flight_log.hpp"
#include "quadlearn/fuzzy.hpp"
#include "quadlearn/model_io.hpp"
#include "quadlearn/network.hpp"
#include "quadlearn/pid.hpp"
#include "quadlearn/trainer.hpp"
#include "quadlearn/trajectories.hpp"

namespace quadlearn {

struct PlantConfig {
  QuadParams params;
  InnerGains inner;
  SimTiming timing;
  CommandLimits limits;
  double settle_time = 3.0;  // s of hover before the trajectory starts

  void validate() const;
};

/// Control-step outputs shared by every outer-loop controller.
struct ControlDecision {
  AxisValues axis_outputs{};  // per-axis outputs actually applied (pre-sign)
  Vec3 delta_u;               // fuzzy correction (zero for PID / frozen nets)
  bool guard = false;
};

class OuterController {
 public:
  virtual ~OuterController() = default;
  virtual ControlDecision step(const ReferencePoint& ref, const Measurement& meas) = 0;
};

class PidOuterController final : public OuterController {
 public:
  PidOuterController(PidGains gains, double dt) : pid_(gains), dt_(dt) {}
  ControlDecision step(const ReferencePoint& ref, const Measurement& meas) override;

 private:
  PidController pid_;
  double dt_;
};

/// Pre-trained networks used as-is (DNN0).
class FrozenNetworkController final : public OuterController {
 public:
  explicit FrozenNetworkController(ControllerModel model) : model_(std::move(model)) {}
  ControlDecision step(const ReferencePoint& ref, const Measurement& meas) override;

 private:
  ControllerModel model_;
  std::array<AxisFeatureWindow, kAxes> windows_{};
};

/// Fixed-capacity FIFO of the most recent samples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const TrainingSample& sample);
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return ring_.size(); }
  /// Oldest first.
  std::vector<TrainingSample> samples() const;

 private:
  std::vector<TrainingSample> ring_;
  std::size_t head_ = 0;  // next write slot
  std::size_t count_ = 0;
};

struct OnlineConfig {
  FuzzyParams fuzzy;
  std::size_t buffer_capacity = 100;
  int cadence = 1;                    // control steps between weight updates
  double divergence_threshold = 2.0;  // m, on any axis
  bool apply_correction = false;      // apply u + du instead of u

  void validate() const;
};

struct OnlineStepResult {
  ControlDecision decision;
  std::array<TrainStatus, kAxes> train_status{};
  std::array<int, kAxes> iterations{};
  bool trained = false;
};

/// Online post-training loop state: networks, windows and replay buffers,
/// owned exclusively by one flight.
class OnlineLearner final : public OuterController {
 public:
  OnlineLearner(ControllerModel model, OnlineConfig online, TrainerConfig trainer,
                CommandLimits limits = {});

  ControlDecision step(const ReferencePoint& ref, const Measurement& meas) override;
  /// One step with full diagnostics.
  OnlineStepResult online_step(const ReferencePoint& ref, const Measurement& meas);

  const ControllerModel& model() const { return model_; }
  bool frozen() const { return frozen_; }
  const ReplayBuffer& buffer(std::size_t axis) const { return buffers_[axis]; }
  const AxisFeatureWindow& window(std::size_t axis) const { return windows_[axis]; }

 private:
  ControllerModel model_;
  ControllerModel anchor_;  // weights at takeoff, target of the online leak
  OnlineConfig online_;
  TrainerConfig trainer_;
  CommandLimits limits_;
  std::array<AxisFeatureWindow, kAxes> windows_{};
  std::array<ReplayBuffer, kAxes> buffers_;
  std::int64_t steps_ = 0;
  bool frozen_ = false;
};

/// Flies one trajectory (settling hover, then the trajectory) at the control
/// rate. GimbalLock or NonFinite abort the flight with a partial log.
FlightLog fly(const PlantConfig& plant, const Disturbance& dist, const TrajectorySpec& trajectory,
              OuterController& controller);

/// PID flights over the trajectory list (cycled, noise seed advanced per
/// flight) recording one sample per axis per post-settling control step.
/// Throws Unstable if a flight aborts.
Dataset collect_offline(const PlantConfig& plant, const Disturbance& dist, const PidGains& gains,
                        const std::vector<TrajectorySpec>& trajectories, std::size_t n_samples,
                        std::uint64_t seed);

struct AxisTrainingReport {
  std::vector<double> loss_history;
  int iterations = 0;
  TrainStatus status = TrainStatus::Converged;
  double train_nse = 0.0;
  double heldout_nse = 0.0;
  bool fallback = false;  // degenerate target variance
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
};

struct PretrainResult {
  ControllerModel model;
  std::array<AxisTrainingReport, kAxes> reports;
};

/// Every fifth sample (index % 5 == 4) is held out; scaling statistics are
/// fitted on the rest, then random-search init and quasi-Newton training.
PretrainResult pretrain(const Dataset& data, const NetworkArchitecture& arch,
                        const TrainerConfig& config);

struct OnlineRunResult {
  FlightLog log;
  ControllerModel final_model;
  bool guard_triggered = false;
};

OnlineRunResult run_online(const PlantConfig& plant, const Disturbance& dist,
                           const ControllerModel& model, const TrajectorySpec& trajectory,
                           const OnlineConfig& online, const TrainerConfig& trainer);

}  // namespace quadlearn
