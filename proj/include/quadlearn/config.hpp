#pragma once

// Experiment configuration: one JSON document with a section per module.
// Missing keys take the documented defaults; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quadlearn/harness.hpp"
#include "quadlearn/learning.hpp"

namespace quadlearn {

struct CollectionConfig {
  std::vector<std::string> trajectories{"circle_xy", "eight_xy", "tight_circle_xy",
                                        "circle_xz", "eight_xz", "tight_circle_xz",
                                        "circle_yz", "eight_yz", "tight_circle_yz"};
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  Disturbance disturbance;
};

struct EvaluationConfig {
  std::vector<std::string> trajectories{"slow_circle", "fast_circle", "square"};
  int repetitions = 5;
  std::uint64_t base_seed = 100;
  Disturbance disturbance;
};

struct ExperimentConfig {
  PlantConfig plant;
  PidGains pid;
  std::map<std::string, TrajectorySpec> trajectories;
  CollectionConfig collection;
  NetworkArchitecture network;
  TrainerConfig trainer;
  OnlineConfig online;
  EvaluationConfig evaluation;
  std::string output_dir = "runs";

  /// Fully defaulted configuration including the named trajectory library.
  static ExperimentConfig defaults();

  const TrajectorySpec& trajectory(const std::string& name) const;
  std::vector<TrajectorySpec> collection_trajectories() const;
  void validate() const;
};

/// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnvVar = "QUADLEARN_CONFIG";

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

/// Evaluation disturbance used for the comparison experiments: +20% mass
/// from t = 0, 0.3 N constant wind along +x, light sensor noise.
Disturbance default_evaluation_disturbance();

ExperimentSpec make_experiment(const ExperimentConfig& config, const std::string& trajectory,
                               ControllerKind controller,
                               std::shared_ptr<const ControllerModel> model);

}  // namespace quadlearn
