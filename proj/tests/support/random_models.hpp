#pragma once

// Shared generators for tests that need random networks and batches.

#include <random>
#include <vector>

#include "quadlearn/model_io.hpp"
#include "quadlearn/network.hpp"

namespace quadlearn::testing {

inline ScalingParams random_scaling(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(-0.5, 0.5), sd(0.2, 2.0);
  ScalingParams s = ScalingParams::identity(kFeatureCount);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    s.input_mean[i] = mean(rng);
    s.input_std[i] = sd(rng);
  }
  s.output_mean = mean(rng);
  s.output_std = sd(rng);
  return s;
}

inline AxisNetwork random_network(std::mt19937_64& rng, NetworkArchitecture arch = {}) {
  std::uniform_real_distribution<double> w(-0.8, 0.8);
  std::vector<double> params(arch.parameter_count());
  for (auto& v : params) v = w(rng);
  return AxisNetwork(arch, random_scaling(rng), std::move(params));
}

inline std::vector<TrainingSample> random_batch(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> x(0.0, 1.0);
  std::vector<TrainingSample> batch(n);
  for (auto& s : batch) {
    for (auto& f : s.features) f = x(rng);
    s.target = x(rng);
  }
  return batch;
}

inline ControllerModel random_model(std::mt19937_64& rng) {
  ControllerModel m;
  for (auto& net : m.nets) net = random_network(rng);
  m.provenance["source"] = "test";
  return m;
}

}  // namespace quadlearn::testing
