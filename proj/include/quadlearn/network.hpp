#pragma once

// Per-axis feed-forward controller network:
//   scaling -> (dense + tanh) x hidden_layers -> dense (linear) -> unscaling.
//
// Parameters are stored as one flat vector, layer by layer, each layer as a
// row-major (out x in) weight block followed by its bias block.

#include <cstddef>
#include <span>
#include <vector>

#include "quadlearn/trajectories.hpp"

namespace quadlearn {

struct NetworkArchitecture {
  std::size_t inputs = kFeatureCount;
  std::size_t hidden_layers = 2;
  std::size_t hidden_width = 6;
  std::size_t outputs = 1;

  /// Layer widths including input and output, e.g. {6, 6, 6, 1}.
  std::vector<std::size_t> layer_sizes() const;
  std::size_t parameter_count() const;
  void validate() const;

  friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;
};

struct TrainingSample {
  Features features{};
  double target = 0.0;
};

/// Mean/std normalization of the input features and the output channel.
struct ScalingParams {
  std::vector<double> input_mean;
  std::vector<double> input_std;
  double output_mean = 0.0;
  double output_std = 1.0;
  double clamp = 5.0;  // bound on scaled features

  static ScalingParams identity(std::size_t inputs);
  /// Statistics of a dataset; a std below 1e-9 is replaced by 1.
  static ScalingParams fit(std::span<const TrainingSample> samples);

  double scale_input(std::size_t i, double v) const;
  double scale_output(double y) const { return (y - output_mean) / output_std; }
  double unscale_output(double o) const { return o * output_std + output_mean; }

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

class AxisNetwork {
 public:
  AxisNetwork() : AxisNetwork(NetworkArchitecture{}) {}
  explicit AxisNetwork(NetworkArchitecture arch);
  AxisNetwork(NetworkArchitecture arch, ScalingParams scaling, std::vector<double> params);

  double forward(std::span<const double> features) const;

  const NetworkArchitecture& architecture() const { return arch_; }
  const ScalingParams& scaling() const { return scaling_; }
  void set_scaling(ScalingParams scaling);
  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  void set_parameters(std::vector<double> params);

  friend bool operator==(const AxisNetwork&, const AxisNetwork&) = default;

 private:
  NetworkArchitecture arch_;
  ScalingParams scaling_;
  std::vector<double> params_;
};

struct LossValue {
  double value = 0.0;
  bool fallback = false;  // target variance too small; plain MSE was used
};

/// Normalized squared error sum((p - y)^2) / sum((y - mean(y))^2), falling
/// back to the mean squared error when the denominator is below 1e-12.
LossValue loss_nse(std::span<const double> predictions, std::span<const double> targets);

struct LossGradient {
  LossValue loss;
  std::vector<double> gradient;  // one entry per parameter
};

/// Exact gradient of loss_nse over the batch by reverse-mode accumulation.
LossGradient gradient(const AxisNetwork& net, std::span<const TrainingSample> batch);

/// Same as `gradient` but evaluated at an arbitrary parameter vector.
LossGradient gradient_at(const NetworkArchitecture& arch, const ScalingParams& scaling,
                         std::span<const double> params, std::span<const TrainingSample> batch);

LossValue evaluate_nse(const AxisNetwork& net, std::span<const TrainingSample> samples);

}  // namespace quadlearn
