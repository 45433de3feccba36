#include "quadlearn/trainer.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "quadlearn/error.hpp"

namespace quadlearn {

void TrainerConfig::validate() const {
  if (max_iterations < 1 || online_max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "quasi-Newton iteration caps must be >= 1");
  }
  if (random_search_candidates < 1) {
    throw Error(ErrorCode::InvalidArgument, "random search needs at least one candidate");
  }
  if (!(online_budget_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  if (!(online_max_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "online step cap must be positive");
  }
  if (!(online_leak >= 0.0)) throw Error(ErrorCode::InvalidArgument, "online leak must be >= 0");
  if (!(line_search.c1 > 0.0 && line_search.c1 < 1.0) ||
      !(line_search.backtrack > 0.0 && line_search.backtrack < 1.0) || line_search.max_trials < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid line-search parameters");
  }
}

std::string_view to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::Converged: return "converged";
    case TrainStatus::IterationCap: return "iteration_cap";
    case TrainStatus::BudgetExhausted: return "budget_exhausted";
    case TrainStatus::LineSearchFailed: return "line_search_failed";
    case TrainStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void set_identity(std::vector<double>& h, std::size_t n, double scale) {
  std::fill(h.begin(), h.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                             const BfgsOptions& options) {
  using Clock = ThreadCpuClock;
  const auto expired = [&] { return options.deadline && Clock::now() >= *options.deadline; };
  const std::size_t n = x0.size();

  MinimizeResult result;
  result.x = std::move(x0);
  std::vector<double> g(n), g_new(n), x_new(n), d(n), s(n), y(n), hy(n);
  std::vector<double> h(n * n);
  set_identity(h, n, 1.0);
  bool scaled = false;

  double fx = f(result.x, g);
  if (!std::isfinite(fx) || !all_finite(g)) {
    result.status = TrainStatus::NonFinite;
    return result;
  }
  result.loss_history.push_back(fx);
  const auto& ls = options.line_search;

  result.status = TrainStatus::IterationCap;
  for (;;) {
    if (std::sqrt(dot(g, g)) < options.gradient_tolerance) {
      result.status = TrainStatus::Converged;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    if (expired()) {
      result.status = TrainStatus::BudgetExhausted;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v -= h[i * n + j] * g[j];
      d[i] = v;
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      set_identity(h, n, 1.0);
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -dot(g, g);
    }
    if (options.max_step_norm) {
      const double len = std::sqrt(dot(d, d));
      if (len > *options.max_step_norm) {
        const double shrink = *options.max_step_norm / len;
        for (auto& v : d) v *= shrink;
        slope *= shrink;
      }
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    bool out_of_time = false;
    for (int trial = 0; trial < ls.max_trials; ++trial) {
      if (trial > 0 && expired()) {
        out_of_time = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + step * d[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + ls.c1 * step * slope && f_new < fx) {
        accepted = true;
        break;
      }
      step *= ls.backtrack;
    }
    if (out_of_time) {
      result.status = TrainStatus::BudgetExhausted;
      break;
    }
    if (!accepted) {
      result.status = TrainStatus::LineSearchFailed;
      break;
    }
    if (!all_finite(g_new)) {
      result.status = TrainStatus::NonFinite;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - result.x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    const double yy = dot(y, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * yy) && sy > 0.0) {
      if (!scaled) {
        set_identity(h, n, sy / yy);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += h[i * n + j] * y[j];
        hy[i] = v;
      }
      const double yhy = dot(y, hy);
      const double ss_coef = rho * rho * yhy + rho;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + ss_coef * s[i] * s[j];
        }
      }
    }

    result.x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    result.loss_history.push_back(fx);
    ++result.iterations;
  }
  return result;
}

AxisNetwork init_random_search(const NetworkArchitecture& arch, const ScalingParams& scaling,
                               std::span<const TrainingSample> samples,
                               const TrainerConfig& config) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "random search needs samples");
  config.validate();

  const std::size_t limit = std::max<std::size_t>(1, config.random_search_subset);
  const std::size_t stride = (samples.size() + limit - 1) / limit;
  std::vector<TrainingSample> subset;
  for (std::size_t i = 0; i < samples.size(); i += stride) subset.push_back(samples[i]);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> draw(-config.init_range, config.init_range);
  const std::size_t n = arch.parameter_count();

  AxisNetwork best(arch, scaling, std::vector<double>(n, 0.0));
  double best_loss = std::numeric_limits<double>::infinity();
  AxisNetwork candidate = best;
  std::vector<double> params(n);
  for (int k = 0; k < config.random_search_candidates; ++k) {
    for (auto& p : params) p = draw(rng);
    candidate.set_parameters(params);
    const double loss = evaluate_nse(candidate, subset).value;
    if (loss < best_loss) {
      best_loss = loss;
      best = candidate;
    }
  }
  return best;
}

TrainResult train_quasi_newton(const AxisNetwork& net, std::span<const TrainingSample> samples,
                               const TrainerConfig& config, TrainMode mode,
                               std::optional<ThreadCpuClock::time_point> deadline,
                               std::span<const double> anchor) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "training needs samples");
  const double leak = mode == TrainMode::Online && !anchor.empty() ? config.online_leak : 0.0;
  if (leak > 0.0 && anchor.size() != net.parameters().size()) {
    throw Error(ErrorCode::InvalidArgument, "anchor size does not match the network");
  }

  const NetworkArchitecture& arch = net.architecture();
  const ScalingParams& scaling = net.scaling();
  const Objective objective = [&](std::span<const double> x, std::span<double> grad) {
    try {
      LossGradient lg = gradient_at(arch, scaling, x, samples);
      std::copy(lg.gradient.begin(), lg.gradient.end(), grad.begin());
      if (leak == 0.0) return lg.loss.value;
      double pull = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - anchor[i];
        grad[i] += leak * d;
        pull += d * d;
      }
      return lg.loss.value + 0.5 * leak * pull;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  BfgsOptions options;
  options.gradient_tolerance = config.gradient_tolerance;
  options.line_search = config.line_search;
  if (mode == TrainMode::Online) {
    options.max_iterations = config.online_max_iterations;
    options.deadline = deadline.value_or(
        ThreadCpuClock::now() +
        std::chrono::duration_cast<ThreadCpuClock::duration>(
            std::chrono::duration<double, std::milli>(config.online_budget_ms)));
    options.max_step_norm = config.online_max_step;
  } else {
    options.max_iterations = config.max_iterations;
  }

  const auto params = net.parameters();
  MinimizeResult m = minimize_bfgs(objective, std::vector<double>(params.begin(), params.end()),
                                   options);
  TrainResult result{net, std::move(m.loss_history), m.iterations, m.status};
  result.net.set_parameters(std::move(m.x));
  return result;
}

}  // namespace quadlearn
