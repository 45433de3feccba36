#include "quadlearn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "quadlearn/csv.hpp"
#include "quadlearn/error.hpp"

namespace quadlearn {

std::vector<ErrorPoint> euclidean_error_series(const FlightLog& log) {
  if (log.rows.empty()) throw Error(ErrorCode::EmptyLog, "flight log has no rows");
  std::vector<ErrorPoint> out;
  for (const auto& row : log.rows) {
    if (row.t < log.settle_time) continue;
    out.push_back({row.t, (row.ref_position - row.position).norm()});
  }
  return out;
}

std::vector<double> error_values(std::span<const ErrorPoint> series) {
  std::vector<double> v;
  v.reserve(series.size());
  for (const auto& p : series) v.push_back(p.error);
  return v;
}

double mae(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "MAE of an empty series");
  return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
}

double mae(std::span<const ErrorPoint> series) {
  const auto v = error_values(series);
  return mae(std::span<const double>(v));
}

Quartiles quartiles(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySeries, "quartiles of an empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto at = [&v](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
  };
  return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

double population_variance(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySeries, "variance of an empty series");
  // Welford's update: exact zero for a constant series.
  double m = 0.0, s = 0.0;
  std::size_t n = 0;
  for (double x : values) {
    ++n;
    const double d = x - m;
    m += d / static_cast<double>(n);
    s += d * (x - m);
  }
  return s / static_cast<double>(n);
}

MetricsReport compute_metrics(const FlightLog& log) {
  const auto series = euclidean_error_series(log);
  const auto v = error_values(series);
  MetricsReport r;
  r.mae = mae(std::span<const double>(v));
  r.max_error = *std::max_element(v.begin(), v.end());
  r.variance = population_variance(v);
  r.error_quartiles = quartiles(v);
  r.samples = v.size();
  double total = 0.0;
  for (const auto& row : log.rows) {
    total += row.step_us;
    r.max_step_us = std::max(r.max_step_us, row.step_us);
  }
  r.mean_step_us = total / static_cast<double>(log.rows.size());
  return r;
}

double improvement_ratio(double mae_candidate, double mae_baseline) {
  if (!(mae_baseline > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline MAE must be positive");
  return (mae_baseline - mae_candidate) / mae_baseline;
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Pid: return "pid";
    case ControllerKind::Dnn0: return "dnn0";
    case ControllerKind::Dnn: return "dnn";
  }
  return "pid";
}

ControllerKind parse_controller_kind(std::string_view s) {
  if (s == "pid") return ControllerKind::Pid;
  if (s == "dnn0") return ControllerKind::Dnn0;
  if (s == "dnn") return ControllerKind::Dnn;
  throw Error(ErrorCode::ConfigError, "unknown controller '" + std::string(s) + "'");
}

RunOutcome run_experiment(const ExperimentSpec& spec, std::uint64_t seed) {
  RunOutcome out;
  out.seed = seed;
  Disturbance dist = spec.disturbance;
  dist.seed = seed;

  if (spec.controller != ControllerKind::Pid && !spec.model) {
    throw Error(ErrorCode::InvalidArgument, "network controllers need a model");
  }
  switch (spec.controller) {
    case ControllerKind::Pid: {
      PidOuterController c(spec.pid, spec.plant.timing.control_dt);
      out.log = fly(spec.plant, dist, spec.trajectory, c);
      break;
    }
    case ControllerKind::Dnn0: {
      FrozenNetworkController c(*spec.model);
      out.log = fly(spec.plant, dist, spec.trajectory, c);
      break;
    }
    case ControllerKind::Dnn: {
      OnlineRunResult r =
          run_online(spec.plant, dist, *spec.model, spec.trajectory, spec.online, spec.trainer);
      out.log = std::move(r.log);
      out.final_model = std::move(r.final_model);
      break;
    }
  }
  if (out.log.aborted) {
    out.failed = true;
    out.failure = out.log.abort_reason;
  }
  try {
    out.metrics = compute_metrics(out.log);
  } catch (const Error& e) {
    out.failed = true;
    if (out.failure.empty()) out.failure = e.what();
  }
  return out;
}

RepeatReport repeat_stats(const ExperimentSpec& spec, int repetitions, std::uint64_t base_seed,
                          int jobs, bool keep_logs) {
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  RepeatReport report;
  report.runs.resize(static_cast<std::size_t>(repetitions));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < repetitions; i = next++) {
      RunOutcome r = run_experiment(spec, base_seed + static_cast<std::uint64_t>(i));
      if (!keep_logs) r.log.rows.clear();
      report.runs[static_cast<std::size_t>(i)] = std::move(r);
    }
  };
  const int threads = std::clamp(jobs, 1, repetitions);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> maes;
  for (const auto& r : report.runs) {
    if (r.failed) {
      report.partial = true;
    } else {
      maes.push_back(r.metrics.mae);
    }
  }
  if (!maes.empty()) {
    report.mae_quartiles = quartiles(maes);
    report.mae_mean = mae(maes);
    report.mae_variance = population_variance(maes);
  }
  return report;
}

namespace {

constexpr std::string_view kLogHeader =
    "t,ref_x,ref_y,ref_z,x,y,z,ref_vx,ref_vy,ref_vz,vx,vy,vz,cmd_pitch,cmd_roll,cmd_w,"
    "du_x,du_y,du_z,e_x,e_y,e_z,de_x,de_y,de_z,guard,clamp,step_us";
constexpr std::size_t kLogColumns = 28;

void append_vec(std::string& out, const Vec3& v) {
  for (std::size_t i = 0; i < 3; ++i) {
    out += ',';
    csv::append(out, v[i]);
  }
}

Vec3 read_vec(const std::vector<std::string_view>& cols, std::size_t at) {
  return {csv::parse_double(cols[at]), csv::parse_double(cols[at + 1]),
          csv::parse_double(cols[at + 2])};
}

}  // namespace

std::string flight_log_to_csv(const FlightLog& log) {
  std::string out(kLogHeader);
  out += '\n';
  for (const auto& r : log.rows) {
    csv::append(out, r.t);
    append_vec(out, r.ref_position);
    append_vec(out, r.position);
    append_vec(out, r.ref_velocity);
    append_vec(out, r.velocity);
    append_vec(out, {r.command.pitch, r.command.roll, r.command.vertical_velocity});
    append_vec(out, r.delta_u);
    append_vec(out, r.e);
    append_vec(out, r.de);
    out += r.guard ? ",1" : ",0";
    out += r.clamp ? ",1," : ",0,";
    csv::append(out, r.step_us);
    out += '\n';
  }
  return out;
}

FlightLog flight_log_from_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty() || rows.front() != kLogHeader) {
    throw Error(ErrorCode::CorruptFile, "flight log header missing or wrong");
  }
  FlightLog log;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = csv::split(rows[i]);
    if (c.size() != kLogColumns) {
      throw Error(ErrorCode::CorruptFile, "flight log row " + std::to_string(i) + " malformed");
    }
    FlightLogRow r;
    r.t = csv::parse_double(c[0]);
    r.ref_position = read_vec(c, 1);
    r.position = read_vec(c, 4);
    r.ref_velocity = read_vec(c, 7);
    r.velocity = read_vec(c, 10);
    const Vec3 cmd = read_vec(c, 13);
    r.command = {cmd.x, cmd.y, cmd.z, 0.0};
    r.delta_u = read_vec(c, 16);
    r.e = read_vec(c, 19);
    r.de = read_vec(c, 22);
    r.guard = c[25] == "1";
    r.clamp = c[26] == "1";
    r.step_us = csv::parse_double(c[27]);
    log.rows.push_back(r);
  }
  if (log.rows.size() >= 2) log.control_dt = log.rows[1].t - log.rows[0].t;
  return log;
}

void export_csv(const FlightLog& log, const std::filesystem::path& path) {
  csv::write_file(path, flight_log_to_csv(log));
}

std::string metrics_table_to_csv(std::span<const MetricsRow> rows) {
  std::string out = "trajectory,controller,run,mae,max_err,var,q1,median,q3,mean_step_us\n";
  for (const auto& r : rows) {
    out += r.trajectory + ',' + r.controller + ',' + std::to_string(r.run);
    for (double v : {r.metrics.mae, r.metrics.max_error, r.metrics.variance,
                     r.metrics.error_quartiles.q1, r.metrics.error_quartiles.median,
                     r.metrics.error_quartiles.q3, r.metrics.mean_step_us}) {
      out += ',';
      csv::append(out, v);
    }
    out += '\n';
  }
  return out;
}

void export_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  csv::write_file(path, metrics_table_to_csv(rows));
}

std::string plot_data_to_csv(std::span<const LabeledLog> logs) {
  std::string out = "t,ref_x,ref_y,ref_z";
  std::size_t n = logs.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& l : logs) {
    out += ',' + l.label + "_x," + l.label + "_y," + l.label + "_z," + l.label + "_err";
    n = std::min(n, l.log->rows.size());
  }
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const FlightLogRow& first = logs.front().log->rows[i];
    csv::append(out, first.t);
    append_vec(out, first.ref_position);
    for (const auto& l : logs) {
      const FlightLogRow& r = l.log->rows[i];
      append_vec(out, r.position);
      out += ',';
      csv::append(out, (r.ref_position - r.position).norm());
    }
    out += '\n';
  }
  return out;
}

void export_plot_data(std::span<const LabeledLog> logs, const std::filesystem::path& path) {
  csv::write_file(path, plot_data_to_csv(logs));
}

}  // namespace quadlearn
