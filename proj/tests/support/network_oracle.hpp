#pragma once

// Straightforward matrix evaluation of the documented parameter layout,
// templated so finite-difference checks can run in extended precision.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "quadlearn/network.hpp"

namespace quadlearn::testing {

template <typename Real>
Real oracle_forward(const AxisNetwork& net, std::span<const double> params, const Features& f) {
  const NetworkArchitecture& a = net.architecture();
  const ScalingParams& s = net.scaling();
  std::vector<Real> x(a.inputs);
  for (std::size_t i = 0; i < a.inputs; ++i) {
    const Real z = (Real(f[i]) - Real(s.input_mean[i])) / Real(s.input_std[i]);
    x[i] = std::min(Real(5), std::max(Real(-5), z));
  }
  const auto sizes = a.layer_sizes();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    std::vector<Real> y(out);
    for (std::size_t j = 0; j < out; ++j) {
      Real acc = params[off + out * in + j];
      for (std::size_t k = 0; k < in; ++k) acc += Real(params[off + j * in + k]) * x[k];
      y[j] = l + 2 == sizes.size() ? acc : std::tanh(acc);
    }
    off += out * in + out;
    x = std::move(y);
  }
  return x[0] * Real(s.output_std) + Real(s.output_mean);
}

inline double oracle_forward(const AxisNetwork& net, const Features& f) {
  return oracle_forward<double>(net, net.parameters(), f);
}

template <typename Real>
Real oracle_nse(const AxisNetwork& net, std::span<const double> params,
                std::span<const TrainingSample> batch) {
  Real mean = 0;
  for (const auto& s : batch) mean += s.target;
  mean /= Real(batch.size());
  Real num = 0, den = 0;
  for (const auto& s : batch) {
    const Real r = oracle_forward<Real>(net, params, s.features) - Real(s.target);
    num += r * r;
    den += (s.target - mean) * (s.target - mean);
  }
  return den < Real(1e-12) ? num / Real(batch.size()) : num / den;
}

inline double oracle_nse(const AxisNetwork& net, std::span<const TrainingSample> batch) {
  return oracle_nse<double>(net, net.parameters(), batch);
}

/// Worst per-component relative error between the library gradient and
/// central differences of the oracle loss, step h.
inline double worst_gradient_error(const AxisNetwork& net, std::span<const TrainingSample> batch,
                                   std::span<const double> grad, double h) {
  std::vector<double> p(net.parameters().begin(), net.parameters().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const long double up = oracle_nse<long double>(net, p, batch);
    p[i] = keep - h;
    const long double down = oracle_nse<long double>(net, p, batch);
    p[i] = keep;
    // the perturbed parameters are exactly representable, so divide by the realised step
    const double fd =
        static_cast<double>((up - down) / ((long double)(keep + h) - (long double)(keep - h)));
    const double rel = std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), 1e-4});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace quadlearn::testing
