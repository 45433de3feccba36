#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quadlearn/config.hpp"
#include "quadlearn/csv.hpp"
#include "quadlearn/error.hpp"
#include "quadlearn/harness.hpp"
#include "quadlearn/model_io.hpp"

namespace fs = std::filesystem;
using namespace quadlearn;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kUnstable = 2,
  kTrainerFailure = 3,
  kAborted = 4,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::string output_dir;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig config = ExperimentConfig::defaults();
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (!path.empty()) config = load_config(path);
  if (!g.output_dir.empty()) config.output_dir = g.output_dir;
  return config;
}

fs::path default_path(const ExperimentConfig& config, const std::string& flag, const char* name) {
  return flag.empty() ? fs::path(config.output_dir) / name : fs::path(flag);
}

std::vector<double> parse_triple(const std::vector<double>& v, const char* what) {
  if (v.size() != kAxes) throw UsageError(std::string(what) + " needs exactly 3 values");
  return v;
}

// -- config init ------------------------------------------------------------

struct ConfigInitArgs {
  std::string out;
};

int cmd_config_init(const Globals& g, const ConfigInitArgs& a) {
  const std::string text = config_to_json(load(g));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    csv::write_file(a.out, text);
    std::cout << "wrote " << a.out << "\n";
  }
  return kOk;
}

// -- collect ----------------------------------------------------------------

struct CollectArgs {
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_collect(const Globals& g, const CollectArgs& a) {
  ExperimentConfig config = load(g);
  if (a.samples) config.collection.samples = *a.samples;
  if (a.seed) config.collection.seed = *a.seed;
  config.validate();

  Dataset data = collect_offline(config.plant, config.collection.disturbance, config.pid,
                                 config.collection_trajectories(), config.collection.samples,
                                 config.collection.seed);
  data.provenance["collection_seed"] = std::to_string(config.collection.seed);
  const fs::path out = default_path(config, a.out, "dataset.csv");
  write_dataset_csv(data, out);
  for (std::size_t i = 0; i < kAxes; ++i) {
    std::cout << axis_name(i) << ": " << data.axes[i].size() << " samples\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

// -- pretrain ---------------------------------------------------------------

struct PretrainArgs {
  std::string dataset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
};

std::string training_report(const PretrainResult& r, const TrainerConfig& t) {
  std::ostringstream os;
  os << "quasi-Newton pre-training (max " << t.max_iterations << " iterations, "
     << t.random_search_candidates << " random-search candidates, seed " << t.seed << ")\n\n";
  for (std::size_t i = 0; i < kAxes; ++i) {
    const AxisTrainingReport& a = r.reports[i];
    os << "axis " << axis_name(i) << "\n"
       << "  status        " << to_string(a.status) << "\n"
       << "  iterations    " << a.iterations << "\n"
       << "  train samples " << a.train_size << "\n"
       << "  held-out      " << a.heldout_size << "\n"
       << "  train NSE     " << csv::format(a.train_nse) << "\n"
       << "  held-out NSE  " << csv::format(a.heldout_nse) << "\n"
       << "  MSE fallback  " << (a.fallback ? "yes" : "no") << "\n";
    if (!a.loss_history.empty()) {
      os << "  loss          " << csv::format(a.loss_history.front()) << " -> "
         << csv::format(a.loss_history.back()) << "\n";
    }
  }
  return os.str();
}

std::string loss_curves(const PretrainResult& r) {
  std::string out = "axis,iteration,loss\n";
  for (std::size_t i = 0; i < kAxes; ++i) {
    const auto& h = r.reports[i].loss_history;
    for (std::size_t k = 0; k < h.size(); ++k) {
      out += std::string(1, axis_name(i)) + "," + std::to_string(k) + "," + csv::format(h[k]) + "\n";
    }
  }
  return out;
}

fs::path sibling(const fs::path& model, const char* suffix) {
  fs::path p = model;
  p.replace_filename(model.stem().string() + suffix);
  return p;
}

int cmd_pretrain(const Globals& g, const PretrainArgs& a) {
  ExperimentConfig config = load(g);
  if (a.seed) config.trainer.seed = *a.seed;
  if (a.max_iterations) config.trainer.max_iterations = *a.max_iterations;
  config.validate();

  const fs::path dataset_path = default_path(config, a.dataset, "dataset.csv");
  const Dataset data = read_dataset_csv(dataset_path);

  PretrainResult result;
  try {
    result = pretrain(data, config.network, config.trainer);
  } catch (const Error& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kTrainerFailure;
  }
  bool failed = false;
  for (const auto& rep : result.reports) {
    if (rep.status == TrainStatus::NonFinite || !std::isfinite(rep.heldout_nse)) failed = true;
  }

  result.model.provenance["dataset"] = dataset_path.string();
  result.model.provenance["trainer_seed"] = std::to_string(config.trainer.seed);
  const fs::path out = default_path(config, a.out, "model.json");
  save_model(result.model, out);
  const std::string report = training_report(result, config.trainer);
  csv::write_file(sibling(out, "_report.txt"), report);
  csv::write_file(sibling(out, "_loss.csv"), loss_curves(result));
  std::cout << report << "wrote " << out.string() << "\n";
  return failed ? kTrainerFailure : kOk;
}

// -- fly --------------------------------------------------------------------

struct FlyArgs {
  std::string controller;
  std::string trajectory = "slow_circle";
  std::string model;
  std::string out;
  std::string model_out;
  std::uint64_t seed = 0;
  std::vector<double> alpha;
  bool nominal = false;
};

int cmd_fly(const Globals& g, const FlyArgs& a) {
  ExperimentConfig config = load(g);
  if (!a.alpha.empty()) {
    const auto alpha = parse_triple(a.alpha, "--alpha");
    std::copy(alpha.begin(), alpha.end(), config.online.fuzzy.alpha.begin());
  }
  if (a.nominal) config.evaluation.disturbance = config.collection.disturbance;
  config.validate();

  const ControllerKind kind = parse_controller_kind(a.controller);
  std::shared_ptr<const ControllerModel> model;
  if (kind != ControllerKind::Pid) {
    if (a.model.empty()) throw UsageError("--model is required for controller " + a.controller);
    model = std::make_shared<const ControllerModel>(load_model(a.model));
  }

  const ExperimentSpec spec = make_experiment(config, a.trajectory, kind, model);
  const std::uint64_t seed = a.seed != 0 ? a.seed : config.evaluation.base_seed;
  const RunOutcome run = run_experiment(spec, seed);

  const fs::path out = default_path(config, a.out, "flight.csv");
  export_csv(run.log, out);
  if (run.final_model) {
    const fs::path model_out = a.model_out.empty() ? sibling(out, "_model.json") : fs::path(a.model_out);
    save_model(*run.final_model, model_out);
    std::cout << "post-trained model: " << model_out.string() << "\n";
  }
  if (run.failed) {
    std::cerr << "flight aborted: " << run.failure << " (partial log " << out.string() << ")\n";
    return kAborted;
  }
  std::printf("%s on %s: MAE %.4f m, max %.4f m, mean step %.1f us, max step %.1f us\n",
              a.controller.c_str(), a.trajectory.c_str(), run.metrics.mae, run.metrics.max_error,
              run.metrics.mean_step_us, run.metrics.max_step_us);
  if (!run.log.rows.empty() && run.log.rows.back().guard) {
    std::cout << "divergence guard triggered; weights were frozen\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

// -- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string model;
  std::string out;
  int jobs = 1;
  std::optional<int> repetitions;
};

int cmd_compare(const Globals& g, const CompareArgs& a) {
  ExperimentConfig config = load(g);
  if (a.repetitions) config.evaluation.repetitions = *a.repetitions;
  config.validate();
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");

  const fs::path out = a.out.empty() ? fs::path(config.output_dir) / "compare" : fs::path(a.out);
  std::shared_ptr<const ControllerModel> model;
  if (!a.model.empty()) {
    model = std::make_shared<const ControllerModel>(load_model(a.model));
  } else {
    std::cout << "no model given; collecting and pre-training\n";
    const Dataset data =
        collect_offline(config.plant, config.collection.disturbance, config.pid,
                        config.collection_trajectories(), config.collection.samples,
                        config.collection.seed);
    PretrainResult pre = pretrain(data, config.network, config.trainer);
    save_model(pre.model, out / "model.json");
    model = std::make_shared<const ControllerModel>(std::move(pre.model));
  }

  const ControllerKind kinds[] = {ControllerKind::Pid, ControllerKind::Dnn0, ControllerKind::Dnn};
  std::vector<MetricsRow> rows;
  bool partial = false;
  std::printf("%-14s %-6s %10s %10s %10s %12s\n", "trajectory", "ctrl", "median", "q1", "q3",
              "step_us");
  for (const std::string& name : config.evaluation.trajectories) {
    std::map<ControllerKind, RepeatReport> reports;
    for (ControllerKind kind : kinds) {
      RepeatReport rep = repeat_stats(make_experiment(config, name, kind, model),
                                      config.evaluation.repetitions, config.evaluation.base_seed,
                                      a.jobs, true);
      partial = partial || rep.partial;
      double step = 0.0;
      for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const RunOutcome& run = rep.runs[i];
        if (run.failed) {
          std::cerr << name << "/" << to_string(kind) << " run " << i << " failed: " << run.failure
                    << "\n";
          continue;
        }
        rows.push_back({name, std::string(to_string(kind)), static_cast<int>(i), run.metrics});
        step += run.metrics.mean_step_us / static_cast<double>(rep.runs.size());
      }
      std::printf("%-14s %-6s %10.4f %10.4f %10.4f %12.1f\n", name.c_str(),
                  std::string(to_string(kind)).c_str(), rep.mae_quartiles.median,
                  rep.mae_quartiles.q1, rep.mae_quartiles.q3, step);
      const std::string stem = name + "_" + std::string(to_string(kind));
      if (!rep.runs.empty() && !rep.runs.front().log.rows.empty()) {
        export_csv(rep.runs.front().log, out / "logs" / (stem + ".csv"));
      }
      reports.emplace(kind, std::move(rep));
    }

    std::vector<LabeledLog> labeled;
    for (ControllerKind kind : kinds) {
      const auto& runs = reports.at(kind).runs;
      if (!runs.empty() && !runs.front().log.rows.empty()) {
        labeled.push_back({std::string(to_string(kind)), &runs.front().log});
      }
    }
    export_plot_data(labeled, out / "plots" / (name + ".csv"));

    const double dnn = reports.at(ControllerKind::Dnn).mae_quartiles.median;
    for (ControllerKind base : {ControllerKind::Pid, ControllerKind::Dnn0}) {
      const double b = reports.at(base).mae_quartiles.median;
      if (b > 0.0 && !reports.at(ControllerKind::Dnn).runs.empty()) {
        std::printf("  improvement of dnn over %s: %.1f%%\n", std::string(to_string(base)).c_str(),
                    100.0 * improvement_ratio(dnn, b));
      }
    }
  }
  export_csv(rows, out / "metrics.csv");
  std::cout << "wrote " << (out / "metrics.csv").string() << "\n";
  if (partial) {
    std::cerr << "some runs failed; statistics cover the remaining runs\n";
    return kAborted;
  }
  return kOk;
}

// -- stats ------------------------------------------------------------------

struct StatsArgs {
  std::string metrics;
  std::string log;
};

int stats_from_log(const std::string& path) {
  const FlightLog log = flight_log_from_csv(csv::read_file(path));
  const MetricsReport m = compute_metrics(log);
  const Quartiles& q = m.error_quartiles;
  std::printf("samples   %zu\nMAE       %.6f m\nmax       %.6f m\nvariance  %.6g m^2\n",
              m.samples, m.mae, m.max_error, m.variance);
  std::printf("quartiles %.6f %.6f %.6f %.6f %.6f\n", q.min, q.q1, q.median, q.q3, q.max);
  std::printf("step time mean %.1f us, max %.1f us\n", m.mean_step_us, m.max_step_us);
  return kOk;
}

int stats_from_metrics(const std::string& path) {
  const std::string text = csv::read_file(path);
  const auto lines = csv::lines(text);
  if (lines.empty()) throw Error(ErrorCode::CorruptFile, "metrics table is empty");
  // (trajectory, controller) -> per-run MAEs
  std::map<std::string, std::map<std::string, std::vector<double>>> table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = csv::split(lines[i]);
    if (cells.size() < 4) {
      throw Error(ErrorCode::CorruptFile, "short metrics row " + std::string(lines[i]));
    }
    table[std::string(cells[0])][std::string(cells[1])].push_back(csv::parse_double(cells[3]));
  }
  std::printf("%-14s %-6s %4s %10s %10s %10s %10s\n", "trajectory", "ctrl", "n", "mean", "q1",
              "median", "q3");
  for (const auto& [traj, by_ctrl] : table) {
    std::map<std::string, double> medians;
    for (const auto& [ctrl, values] : by_ctrl) {
      const Quartiles q = quartiles(values);
      double mean = 0.0;
      for (double v : values) mean += v / static_cast<double>(values.size());
      medians[ctrl] = q.median;
      std::printf("%-14s %-6s %4zu %10.4f %10.4f %10.4f %10.4f\n", traj.c_str(), ctrl.c_str(),
                  values.size(), mean, q.q1, q.median, q.q3);
    }
    if (medians.count("dnn")) {
      for (const char* base : {"pid", "dnn0"}) {
        if (medians.count(base) && medians[base] > 0.0) {
          std::printf("  improvement of dnn over %s: %.1f%%\n", base,
                      100.0 * improvement_ratio(medians["dnn"], medians[base]));
        }
      }
    }
  }
  return kOk;
}

int cmd_stats(const StatsArgs& a) {
  if (a.metrics.empty() == a.log.empty()) throw UsageError("give exactly one of --metrics or --log");
  return a.log.empty() ? stats_from_metrics(a.metrics) : stats_from_log(a.log);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadlearn: PID-supervised pre-training and fuzzy-supervised online training of "
               "per-axis neural position controllers on a simulated quadrotor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config_path,
                 std::string("experiment config (JSON); defaults to $") + kConfigEnvVar);
  app.add_option("--output-dir", g.output_dir, "directory for default output paths");

  auto* config_cmd = app.add_subcommand("config", "configuration helpers");
  config_cmd->require_subcommand(1);
  ConfigInitArgs init_args;
  auto* init = config_cmd->add_subcommand("init", "print the fully-defaulted reference config");
  init->add_option("-o,--out", init_args.out, "write to this file instead of stdout");

  CollectArgs collect_args;
  auto* collect = app.add_subcommand("collect", "fly PID over the training trajectories and record samples");
  collect->add_option("-n,--samples", collect_args.samples, "samples per axis");
  collect->add_option("--seed", collect_args.seed, "noise seed of the first flight");
  collect->add_option("-o,--out", collect_args.out, "dataset CSV (default <output_dir>/dataset.csv)");

  PretrainArgs pretrain_args;
  auto* pre = app.add_subcommand("pretrain", "train the per-axis networks on a dataset");
  pre->add_option("-d,--dataset", pretrain_args.dataset, "dataset CSV (default <output_dir>/dataset.csv)");
  pre->add_option("-o,--out", pretrain_args.out, "model file (default <output_dir>/model.json)");
  pre->add_option("--seed", pretrain_args.seed, "random-search seed");
  pre->add_option("--max-iterations", pretrain_args.max_iterations, "quasi-Newton iteration cap");

  FlyArgs fly_args;
  auto* fly_cmd = app.add_subcommand("fly", "fly one trajectory with one controller");
  fly_cmd->add_option("--controller", fly_args.controller, "pid, dnn0 or dnn")
      ->required()
      ->check(CLI::IsMember({"pid", "dnn0", "dnn"}));
  fly_cmd->add_option("-t,--trajectory", fly_args.trajectory, "trajectory name from the config")
      ->capture_default_str();
  fly_cmd->add_option("-m,--model", fly_args.model, "model file (dnn0 and dnn)");
  fly_cmd->add_option("-o,--out", fly_args.out, "flight log CSV (default <output_dir>/flight.csv)");
  fly_cmd->add_option("--model-out", fly_args.model_out, "post-trained model (dnn only)");
  fly_cmd->add_option("--seed", fly_args.seed, "noise seed (default evaluation.base_seed)");
  fly_cmd->add_option("--alpha", fly_args.alpha, "fuzzy correction gain per axis: x y z")
      ->expected(3);
  fly_cmd->add_flag("--nominal", fly_args.nominal,
                    "fly with the collection disturbance instead of the evaluation one");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "run the controller x trajectory matrix");
  compare->add_option("-m,--model", compare_args.model, "model file (collected and trained if absent)");
  compare->add_option("-o,--out", compare_args.out, "output directory (default <output_dir>/compare)");
  compare->add_option("-j,--jobs", compare_args.jobs, "parallel runs")->capture_default_str();
  compare->add_option("-r,--repetitions", compare_args.repetitions, "runs per cell");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "summarise a metrics table or a flight log");
  stats->add_option("--metrics", stats_args.metrics, "metrics CSV written by compare");
  stats->add_option("--log", stats_args.log, "flight log CSV written by fly");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*init) return cmd_config_init(g, init_args);
    if (*collect) return cmd_collect(g, collect_args);
    if (*pre) return cmd_pretrain(g, pretrain_args);
    if (*fly_cmd) return cmd_fly(g, fly_args);
    if (*compare) return cmd_compare(g, compare_args);
    if (*stats) return cmd_stats(stats_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::Unstable: return kUnstable;
      case ErrorCode::GimbalLock:
      case ErrorCode::NonFinite: return kAborted;
      default: return kUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
