#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quadlearn/cpu_clock.hpp"
#include "quadlearn/network.hpp"

namespace quadlearn {

struct LineSearchConfig {
  double c1 = 1e-4;         // Armijo sufficient-decrease constant
  double backtrack = 0.5;   // step shrink factor
  int max_trials = 40;
};

struct TrainerConfig {
  int max_iterations = 400;  // n_QN for offline training
  LineSearchConfig line_search;
  double gradient_tolerance = 1e-7;
  int random_search_candidates = 100;
  std::size_t random_search_subset = 2000;  // samples used to rank candidates
  double init_range = 0.5;                  // candidates drawn from [-r, r]
  std::uint64_t seed = 7;
  int online_max_iterations = 2;  // n_QN per in-flight update
  double online_budget_ms = 6.0;
  double online_max_step = 0.02;  // cap on the parameter-space length of one online step
  double online_leak = 0.005;     // pull toward the anchor weights: + leak/2 * |w - w0|^2

  void validate() const;
};

enum class TrainStatus { Converged, IterationCap, BudgetExhausted, LineSearchFailed, NonFinite };
std::string_view to_string(TrainStatus status);

/// f(x) -> value, writing the gradient into `grad`.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct BfgsOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  LineSearchConfig line_search;
  std::optional<ThreadCpuClock::time_point> deadline;  // checked between evaluations
  std::optional<double> max_step_norm;  // search directions are shortened to this length
};

struct MinimizeResult {
  std::vector<double> x;
  std::vector<double> loss_history;  // initial value, then one entry per accepted step
  int iterations = 0;
  TrainStatus status = TrainStatus::Converged;
};

/// Full-memory BFGS on the inverse Hessian, starting from the identity, with
/// a backtracking Armijo line search. Every accepted step strictly decreases f.
MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options);

/// Draws K uniform candidates from the seeded generator and keeps the one
/// with the lowest NSE on an evenly strided subset of `samples`.
AxisNetwork init_random_search(const NetworkArchitecture& arch, const ScalingParams& scaling,
                               std::span<const TrainingSample> samples,
                               const TrainerConfig& config);

struct TrainResult {
  AxisNetwork net;
  std::vector<double> loss_history;
  int iterations = 0;
  TrainStatus status = TrainStatus::Converged;
};

enum class TrainMode { Offline, Online };

/// Quasi-Newton training of one axis network. Online mode uses the per-step
/// iteration cap and stops at `deadline` (default: now + online budget); when
/// `anchor` is given it also adds the online leak term toward those weights.
TrainResult train_quasi_newton(
    const AxisNetwork& net, std::span<const TrainingSample> samples, const TrainerConfig& config,
    TrainMode mode = TrainMode::Offline,
    std::optional<ThreadCpuClock::time_point> deadline = std::nullopt,
    std::span<const double> anchor = {});

}  // namespace quadlearn
