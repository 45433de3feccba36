#include "quadlearn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quadlearn/error.hpp"

namespace quadlearn {

std::vector<std::size_t> NetworkArchitecture::layer_sizes() const {
  std::vector<std::size_t> sizes{inputs};
  for (std::size_t l = 0; l < hidden_layers; ++l) sizes.push_back(hidden_width);
  sizes.push_back(outputs);
  return sizes;
}

std::size_t NetworkArchitecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t n = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) n += sizes[l] * sizes[l - 1] + sizes[l];
  return n;
}

void NetworkArchitecture::validate() const {
  if (inputs != kFeatureCount) {
    throw Error(ErrorCode::InvalidArgument, "network input count must match the feature window");
  }
  if (outputs != 1) throw Error(ErrorCode::InvalidArgument, "network must have one output");
  if (hidden_layers == 0 || hidden_width == 0) {
    throw Error(ErrorCode::InvalidArgument, "network needs at least one hidden neuron");
  }
}

ScalingParams ScalingParams::identity(std::size_t inputs) {
  ScalingParams s;
  s.input_mean.assign(inputs, 0.0);
  s.input_std.assign(inputs, 1.0);
  return s;
}

ScalingParams ScalingParams::fit(std::span<const TrainingSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "cannot fit scaling on no samples");
  constexpr double kMinStd = 1e-9;
  const auto n = static_cast<double>(samples.size());
  ScalingParams s = identity(kFeatureCount);

  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double mean = 0.0;
    for (const auto& x : samples) mean += x.features[i];
    mean /= n;
    double var = 0.0;
    for (const auto& x : samples) var += (x.features[i] - mean) * (x.features[i] - mean);
    const double sd = std::sqrt(var / n);
    s.input_mean[i] = mean;
    s.input_std[i] = sd < kMinStd ? 1.0 : sd;
  }

  double mean = 0.0;
  for (const auto& x : samples) mean += x.target;
  mean /= n;
  double var = 0.0;
  for (const auto& x : samples) var += (x.target - mean) * (x.target - mean);
  const double sd = std::sqrt(var / n);
  s.output_mean = mean;
  s.output_std = sd < kMinStd ? 1.0 : sd;
  return s;
}

double ScalingParams::scale_input(std::size_t i, double v) const {
  return std::clamp((v - input_mean[i]) / input_std[i], -clamp, clamp);
}

namespace {

std::size_t activation_count(const NetworkArchitecture& arch) {
  return arch.inputs + arch.hidden_layers * arch.hidden_width + arch.outputs;
}

// Forward pass shared by inference and training, so both paths produce
// bit-identical outputs. Fills `acts` with the scaled input followed by every
// layer's activations and returns the unscaled network output.
double propagate(const NetworkArchitecture& arch, const ScalingParams& scaling,
                 std::span<const double> params, std::span<const double> features,
                 std::span<double> acts) {
  for (std::size_t i = 0; i < arch.inputs; ++i) acts[i] = scaling.scale_input(i, features[i]);

  std::size_t in_offset = 0;
  std::size_t in_size = arch.inputs;
  std::size_t p = 0;
  const std::size_t layers = arch.hidden_layers + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const bool is_output = l + 1 == layers;
    const std::size_t out_size = is_output ? arch.outputs : arch.hidden_width;
    const std::size_t out_offset = in_offset + in_size;
    const std::size_t bias = p + out_size * in_size;
    for (std::size_t j = 0; j < out_size; ++j) {
      double z = params[bias + j];
      const double* w = &params[p + j * in_size];
      for (std::size_t k = 0; k < in_size; ++k) z += w[k] * acts[in_offset + k];
      acts[out_offset + j] = is_output ? z : std::tanh(z);
    }
    p = bias + out_size;
    in_offset = out_offset;
    in_size = out_size;
  }
  return scaling.unscale_output(acts[in_offset]);
}

}  // namespace

AxisNetwork::AxisNetwork(NetworkArchitecture arch)
    : arch_(arch),
      scaling_(ScalingParams::identity(arch.inputs)),
      params_(arch.parameter_count(), 0.0) {
  arch_.validate();
}

AxisNetwork::AxisNetwork(NetworkArchitecture arch, ScalingParams scaling, std::vector<double> params)
    : arch_(arch) {
  arch_.validate();
  set_scaling(std::move(scaling));
  set_parameters(std::move(params));
}

void AxisNetwork::set_scaling(ScalingParams scaling) {
  if (scaling.input_mean.size() != arch_.inputs || scaling.input_std.size() != arch_.inputs) {
    throw Error(ErrorCode::InvalidArgument, "scaling does not match network inputs");
  }
  scaling_ = std::move(scaling);
}

void AxisNetwork::set_parameters(std::vector<double> params) {
  if (params.size() != arch_.parameter_count()) {
    throw Error(ErrorCode::InvalidArgument, "parameter vector has wrong length");
  }
  params_ = std::move(params);
}

double AxisNetwork::forward(std::span<const double> features) const {
  double buffer[64];
  std::vector<double> heap;
  std::span<double> acts;
  const std::size_t n = activation_count(arch_);
  if (n <= std::size(buffer)) {
    acts = std::span<double>(buffer, n);
  } else {
    heap.resize(n);
    acts = heap;
  }
  const double y = propagate(arch_, scaling_, params_, features, acts);
  if (!std::isfinite(y)) throw Error(ErrorCode::NonFinite, "network output is not finite");
  return y;
}

LossValue loss_nse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw Error(ErrorCode::EmptyBatch, "loss needs equal-length, non-empty inputs");
  }
  const auto n = static_cast<double>(targets.size());
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = predictions[i] - targets[i];
    num += r * r;
    den += (targets[i] - mean) * (targets[i] - mean);
  }
  if (den < 1e-12) return {num / n, true};
  return {num / den, false};
}

LossGradient gradient_at(const NetworkArchitecture& arch, const ScalingParams& scaling,
                         std::span<const double> params, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "gradient needs a non-empty batch");

  const auto n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& s : batch) mean += s.target;
  mean /= n;
  double den = 0.0;
  for (const auto& s : batch) den += (s.target - mean) * (s.target - mean);
  const bool fallback = den < 1e-12;
  const double norm = fallback ? n : den;

  const std::size_t n_acts = activation_count(arch);
  const std::size_t layers = arch.hidden_layers + 1;
  std::vector<double> acts(n_acts);
  std::vector<double> delta(n_acts);
  LossGradient out;
  out.gradient.assign(params.size(), 0.0);
  double num = 0.0;

  // Offsets of each layer's parameter block and activation block.
  std::vector<std::size_t> p_off(layers), a_off(layers + 1), sizes(layers + 1);
  sizes[0] = arch.inputs;
  a_off[0] = 0;
  std::size_t p = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    sizes[l + 1] = l + 1 == layers ? arch.outputs : arch.hidden_width;
    a_off[l + 1] = a_off[l] + sizes[l];
    p_off[l] = p;
    p += sizes[l + 1] * sizes[l] + sizes[l + 1];
  }

  for (const auto& sample : batch) {
    const double y_hat = propagate(arch, scaling, params, sample.features, acts);
    const double r = y_hat - sample.target;
    num += r * r;
    if (r == 0.0) continue;

    // dL/d(pre-unscale output)
    delta[a_off[layers]] = 2.0 * r / norm * scaling.output_std;
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in_size = sizes[l], out_size = sizes[l + 1];
      const std::size_t w0 = p_off[l];
      const std::size_t b0 = w0 + out_size * in_size;
      for (std::size_t j = 0; j < out_size; ++j) {
        const double d = delta[a_off[l + 1] + j];
        out.gradient[b0 + j] += d;
        for (std::size_t k = 0; k < in_size; ++k) {
          out.gradient[w0 + j * in_size + k] += d * acts[a_off[l] + k];
        }
      }
      if (l == 0) break;
      for (std::size_t k = 0; k < in_size; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < out_size; ++j) {
          s += params[w0 + j * in_size + k] * delta[a_off[l + 1] + j];
        }
        const double a = acts[a_off[l] + k];
        delta[a_off[l] + k] = s * (1.0 - a * a);
      }
    }
  }

  out.loss = {num / norm, fallback};
  for (double g : out.gradient) {
    if (!std::isfinite(g)) throw Error(ErrorCode::NonFinite, "gradient is not finite");
  }
  return out;
}

LossGradient gradient(const AxisNetwork& net, std::span<const TrainingSample> batch) {
  return gradient_at(net.architecture(), net.scaling(), net.parameters(), batch);
}

LossValue evaluate_nse(const AxisNetwork& net, std::span<const TrainingSample> samples) {
  std::vector<double> pred, target;
  pred.reserve(samples.size());
  target.reserve(samples.size());
  for (const auto& s : samples) {
    pred.push_back(net.forward(s.features));
    target.push_back(s.target);
  }
  return loss_nse(pred, target);
}

}  // namespace quadlearn
