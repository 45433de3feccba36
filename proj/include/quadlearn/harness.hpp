#pragma once

// Metrics over flight logs, repeated experiments, and file exports.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadlearn/flight_log.hpp"
#include "quadlearn/learning.hpp"

namespace quadlearn {

struct ErrorPoint {
  double t = 0.0;
  double error = 0.0;  // m
};

/// Pointwise ||p* - p|| over the post-settling rows. EmptyLog if the log has
/// no rows at all.
std::vector<ErrorPoint> euclidean_error_series(const FlightLog& log);
std::vector<double> error_values(std::span<const ErrorPoint> series);

double mae(std::span<const double> series);
double mae(std::span<const ErrorPoint> series);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear interpolation between order statistics (position p * (n - 1)).
Quartiles quartiles(std::span<const double> values);
double population_variance(std::span<const double> values);

struct MetricsReport {
  double mae = 0.0;
  double max_error = 0.0;
  double variance = 0.0;
  Quartiles error_quartiles;
  double mean_step_us = 0.0;
  double max_step_us = 0.0;
  std::size_t samples = 0;
};

MetricsReport compute_metrics(const FlightLog& log);

/// (baseline - candidate) / baseline; ZeroBaseline when baseline <= 0.
double improvement_ratio(double mae_candidate, double mae_baseline);

enum class ControllerKind { Pid, Dnn0, Dnn };
std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view s);

struct ExperimentSpec {
  std::string trajectory_name;
  TrajectorySpec trajectory;
  ControllerKind controller = ControllerKind::Pid;
  PlantConfig plant;
  Disturbance disturbance;  // seed is replaced per repetition
  PidGains pid;
  std::shared_ptr<const ControllerModel> model;  // required for Dnn0 / Dnn
  OnlineConfig online;
  TrainerConfig trainer;
};

struct RunOutcome {
  std::uint64_t seed = 0;
  FlightLog log;
  MetricsReport metrics;
  std::optional<ControllerModel> final_model;  // Dnn only
  bool failed = false;
  std::string failure;
};

/// Single flight with the given noise seed.
RunOutcome run_experiment(const ExperimentSpec& spec, std::uint64_t seed);

struct RepeatReport {
  std::vector<RunOutcome> runs;
  Quartiles mae_quartiles;  // across runs
  double mae_mean = 0.0;
  double mae_variance = 0.0;
  bool partial = false;  // at least one run failed; statistics cover the rest
};

/// Runs seeds base_seed .. base_seed + repetitions - 1 on up to `jobs`
/// worker threads; results are ordered by seed regardless of scheduling.
RepeatReport repeat_stats(const ExperimentSpec& spec, int repetitions, std::uint64_t base_seed,
                          int jobs = 1, bool keep_logs = true);

// Flight-log CSV. Timing sits in the last column (step_us).
std::string flight_log_to_csv(const FlightLog& log);
FlightLog flight_log_from_csv(std::string_view text);
void export_csv(const FlightLog& log, const std::filesystem::path& path);

struct MetricsRow {
  std::string trajectory;
  std::string controller;
  int run = 0;
  MetricsReport metrics;
};

/// Columns: trajectory,controller,run,mae,max_err,var,q1,median,q3,mean_step_us
std::string metrics_table_to_csv(std::span<const MetricsRow> rows);
void export_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);

struct LabeledLog {
  std::string label;
  const FlightLog* log = nullptr;
};

/// Wide CSV aligned on time: t, reference xyz, then per label the actual
/// xyz and Euclidean error. Series are truncated to the shortest log.
std::string plot_data_to_csv(std::span<const LabeledLog> logs);
void export_plot_data(std::span<const LabeledLog> logs, const std::filesystem::path& path);

}  // namespace quadlearn
