#include "quadlearn/config.hpp"

#include <json.hpp>
#include <set>
#include <utility>

#include "quadlearn/csv.hpp"
#include "quadlearn/error.hpp"

namespace quadlearn {

using nlohmann::json;

namespace {

// Reads an object section, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorCode::ConfigError, path_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, path_ + "." + key + ": " + e.what());
    }
  }

  void read(const char* key, Vec3& out) {
    std::vector<double> v{out.x, out.y, out.z};
    read(key, v);
    if (v.size() != 3) throw Error(ErrorCode::ConfigError, path_ + "." + key + " needs 3 values");
    out = {v[0], v[1], v[2]};
  }

  bool has(const char* key) const { return j_.contains(key); }
  void mark(const char* key) { used_.insert(key); }

  Section child(const char* key) {
    used_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) {
        throw Error(ErrorCode::ConfigError, "unknown key " + path_ + "." + item.key());
      }
    }
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json to_json(const Disturbance& d) {
  json schedule = json::array();
  for (const auto& m : d.mass_schedule) schedule.push_back({{"time", m.time}, {"delta", m.delta}});
  return {{"force", vec_json(d.force)},
          {"force_ramp", vec_json(d.force_ramp)},
          {"mass_schedule", schedule},
          {"position_noise_std", d.position_noise_std},
          {"velocity_noise_std", d.velocity_noise_std}};
}

void read_disturbance(Section s, Disturbance& d) {
  s.read("force", d.force);
  s.read("force_ramp", d.force_ramp);
  if (s.has("mass_schedule")) {
    const json& arr = s.raw().at("mass_schedule");
    s.mark("mass_schedule");
    if (!arr.is_array()) throw Error(ErrorCode::ConfigError, s.path() + ".mass_schedule");
    d.mass_schedule.clear();
    for (const json& entry : arr) {
      Section e(entry, s.path() + ".mass_schedule[]");
      MassChange m;
      e.read("time", m.time);
      e.read("delta", m.delta);
      e.finish();
      d.mass_schedule.push_back(m);
    }
  }
  s.read("position_noise_std", d.position_noise_std);
  s.read("velocity_noise_std", d.velocity_noise_std);
  s.finish();
}

json to_json(const TrajectorySpec& t) {
  return {{"kind", std::string(to_string(t.kind))},
          {"plane", std::string(to_string(t.plane))},
          {"size", t.size},
          {"speed", t.speed},
          {"center", vec_json(t.center)},
          {"duration", t.duration},
          {"takeoff_altitude", t.takeoff_altitude}};
}

TrajectorySpec read_trajectory(Section s) {
  TrajectorySpec t;
  std::string kind(to_string(t.kind)), plane(to_string(t.plane));
  s.read("kind", kind);
  s.read("plane", plane);
  t.kind = parse_trajectory_kind(kind);
  t.plane = parse_trajectory_plane(plane);
  s.read("size", t.size);
  s.read("speed", t.speed);
  s.read("center", t.center);
  s.read("duration", t.duration);
  s.read("takeoff_altitude", t.takeoff_altitude);
  s.finish();
  return t;
}

TrajectorySpec make_trajectory(TrajectoryKind kind, TrajectoryPlane plane, double size,
                               double speed, double duration) {
  TrajectorySpec t;
  t.kind = kind;
  t.plane = plane;
  t.size = size;
  t.speed = speed;
  t.center = {0.0, 0.0, 2.0};
  t.takeoff_altitude = 2.0;
  t.duration = duration;
  return t;
}

}  // namespace

Disturbance default_evaluation_disturbance() {
  Disturbance d;
  d.force = {0.3, 0.0, 0.0};
  d.mass_schedule = {{0.0, 0.1}};
  d.position_noise_std = 0.002;
  d.velocity_noise_std = 0.005;
  return d;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  using K = TrajectoryKind;
  using P = TrajectoryPlane;
  // short training flights so that the collection budget spans all of them
  constexpr double kTrainDuration = 5.0;
  constexpr double kEvalDuration = 40.0;
  for (const auto& [suffix, plane] : {std::pair{"xy", P::XY}, {"xz", P::XZ}, {"yz", P::YZ}}) {
    const std::string s = suffix;
    c.trajectories["circle_" + s] = make_trajectory(K::Circle, plane, 1.0, 1.0, kTrainDuration);
    c.trajectories["eight_" + s] = make_trajectory(K::Eight, plane, 0.5, 1.0, kTrainDuration);
    c.trajectories["tight_circle_" + s] = make_trajectory(K::Circle, plane, 0.5, 1.0, kTrainDuration);
  }
  c.trajectories["slow_circle"] = make_trajectory(K::Circle, P::XY, 1.0, 1.0, kEvalDuration);
  c.trajectories["fast_circle"] = make_trajectory(K::Circle, P::XY, 1.0, 2.0, kEvalDuration);
  c.trajectories["square"] = make_trajectory(K::Square, P::XY, 2.0, 1.0, kEvalDuration);
  c.collection.disturbance.position_noise_std = 0.002;
  c.collection.disturbance.velocity_noise_std = 0.005;
  c.evaluation.disturbance = default_evaluation_disturbance();
  return c;
}

const TrajectorySpec& ExperimentConfig::trajectory(const std::string& name) const {
  const auto it = trajectories.find(name);
  if (it == trajectories.end()) {
    throw Error(ErrorCode::ConfigError, "unknown trajectory '" + name + "'");
  }
  return it->second;
}

std::vector<TrajectorySpec> ExperimentConfig::collection_trajectories() const {
  std::vector<TrajectorySpec> out;
  for (const auto& name : collection.trajectories) out.push_back(trajectory(name));
  return out;
}

void ExperimentConfig::validate() const {
  try {
    plant.validate();
    pid.validate();
    network.validate();
    trainer.validate();
    online.validate();
    for (const auto& [name, t] : trajectories) t.validate();
    collection.disturbance.validate(plant.params);
    evaluation.disturbance.validate(plant.params);
    for (const auto& name : collection.trajectories) trajectory(name);
    for (const auto& name : evaluation.trajectories) trajectory(name);
    if (evaluation.repetitions < 1) {
      throw Error(ErrorCode::InvalidArgument, "evaluation.repetitions must be >= 1");
    }
    if (collection.samples < 1) throw Error(ErrorCode::InvalidArgument, "collection.samples < 1");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  const auto& p = c.plant.params;
  doc["plant"] = {{"mass", p.mass},       {"gravity", p.gravity},       {"ix", p.ix},
                  {"iy", p.iy},           {"iz", p.iz},                 {"thrust_max", p.thrust_max},
                  {"torque_max", p.torque_max}};
  const auto& g = c.plant.inner;
  doc["inner_loop"] = {{"kw", g.kw},
                       {"k_attitude", g.k_attitude},
                       {"k_rate", g.k_rate},
                       {"k_yaw", g.k_yaw},
                       {"k_yaw_rate", g.k_yaw_rate}};
  doc["timing"] = {{"physics_dt", c.plant.timing.physics_dt},
                   {"control_dt", c.plant.timing.control_dt},
                   {"settle_time", c.plant.settle_time}};
  doc["limits"] = {{"tilt", c.plant.limits.tilt},
                   {"vertical_velocity", c.plant.limits.vertical_velocity}};
  json pid;
  for (std::size_t a = 0; a < kAxes; ++a) {
    const auto& ax = c.pid.axes[a];
    pid[std::string(1, axis_name(a))] = {{"kp", ax.kp},
                                         {"ki", ax.ki},
                                         {"kd", ax.kd},
                                         {"integral_clamp", ax.integral_clamp},
                                         {"output_clamp", ax.output_clamp}};
  }
  doc["pid"] = pid;
  json traj = json::object();
  for (const auto& [name, t] : c.trajectories) traj[name] = to_json(t);
  doc["trajectories"] = traj;
  doc["collection"] = {{"trajectories", c.collection.trajectories},
                       {"samples", c.collection.samples},
                       {"seed", c.collection.seed},
                       {"disturbance", to_json(c.collection.disturbance)}};
  doc["network"] = {{"hidden_layers", c.network.hidden_layers},
                    {"hidden_width", c.network.hidden_width}};
  const auto& t = c.trainer;
  doc["trainer"] = {{"max_iterations", t.max_iterations},
                    {"c1", t.line_search.c1},
                    {"backtrack", t.line_search.backtrack},
                    {"max_line_search_trials", t.line_search.max_trials},
                    {"gradient_tolerance", t.gradient_tolerance},
                    {"random_search_candidates", t.random_search_candidates},
                    {"random_search_subset", t.random_search_subset},
                    {"init_range", t.init_range},
                    {"seed", t.seed},
                    {"online_max_iterations", t.online_max_iterations},
                    {"online_budget_ms", t.online_budget_ms},
                    {"online_max_step", t.online_max_step},
                    {"online_leak", t.online_leak}};
  doc["fuzzy"] = {{"alpha", std::vector<double>(c.online.fuzzy.alpha.begin(),
                                                c.online.fuzzy.alpha.end())},
                  {"e_scale", c.online.fuzzy.e_scale},
                  {"de_scale", c.online.fuzzy.de_scale}};
  doc["online"] = {{"buffer_capacity", c.online.buffer_capacity},
                   {"cadence", c.online.cadence},
                   {"divergence_threshold", c.online.divergence_threshold},
                   {"apply_correction", c.online.apply_correction}};
  doc["evaluation"] = {{"trajectories", c.evaluation.trajectories},
                       {"repetitions", c.evaluation.repetitions},
                       {"base_seed", c.evaluation.base_seed},
                       {"disturbance", to_json(c.evaluation.disturbance)}};
  doc["output_dir"] = c.output_dir;
  return doc.dump(2) + "\n";
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config does not parse: ") + e.what());
  }

  ExperimentConfig c = ExperimentConfig::defaults();
  Section root(doc, "config");

  if (root.has("plant")) {
    Section s = root.child("plant");
    auto& p = c.plant.params;
    s.read("mass", p.mass);
    s.read("gravity", p.gravity);
    s.read("ix", p.ix);
    s.read("iy", p.iy);
    s.read("iz", p.iz);
    s.read("thrust_max", p.thrust_max);
    s.read("torque_max", p.torque_max);
    s.finish();
  }
  if (root.has("inner_loop")) {
    Section s = root.child("inner_loop");
    auto& g = c.plant.inner;
    s.read("kw", g.kw);
    s.read("k_attitude", g.k_attitude);
    s.read("k_rate", g.k_rate);
    s.read("k_yaw", g.k_yaw);
    s.read("k_yaw_rate", g.k_yaw_rate);
    s.finish();
  }
  if (root.has("timing")) {
    Section s = root.child("timing");
    s.read("physics_dt", c.plant.timing.physics_dt);
    s.read("control_dt", c.plant.timing.control_dt);
    s.read("settle_time", c.plant.settle_time);
    s.finish();
  }
  if (root.has("limits")) {
    Section s = root.child("limits");
    s.read("tilt", c.plant.limits.tilt);
    s.read("vertical_velocity", c.plant.limits.vertical_velocity);
    s.finish();
  }
  if (root.has("pid")) {
    Section s = root.child("pid");
    for (std::size_t a = 0; a < kAxes; ++a) {
      const std::string key(1, axis_name(a));
      if (!s.has(key.c_str())) continue;
      Section ax = s.child(key.c_str());
      auto& g = c.pid.axes[a];
      ax.read("kp", g.kp);
      ax.read("ki", g.ki);
      ax.read("kd", g.kd);
      ax.read("integral_clamp", g.integral_clamp);
      ax.read("output_clamp", g.output_clamp);
      ax.finish();
    }
    s.finish();
  }
  if (root.has("trajectories")) {
    Section s = root.child("trajectories");
    for (const auto& item : s.raw().items()) {
      const std::string name = item.key();
      TrajectorySpec base = c.trajectories.count(name) ? c.trajectories[name] : TrajectorySpec{};
      Section t = s.child(name.c_str());
      // Start from the library entry (or plain defaults) and override.
      json merged = to_json(base);
      for (const auto& kv : t.raw().items()) merged[kv.key()] = kv.value();
      c.trajectories[name] = read_trajectory(Section(merged, t.path()));
    }
    s.finish();
  }
  if (root.has("collection")) {
    Section s = root.child("collection");
    s.read("trajectories", c.collection.trajectories);
    s.read("samples", c.collection.samples);
    s.read("seed", c.collection.seed);
    if (s.has("disturbance")) read_disturbance(s.child("disturbance"), c.collection.disturbance);
    s.finish();
  }
  if (root.has("network")) {
    Section s = root.child("network");
    s.read("hidden_layers", c.network.hidden_layers);
    s.read("hidden_width", c.network.hidden_width);
    s.finish();
  }
  if (root.has("trainer")) {
    Section s = root.child("trainer");
    auto& t = c.trainer;
    s.read("max_iterations", t.max_iterations);
    s.read("c1", t.line_search.c1);
    s.read("backtrack", t.line_search.backtrack);
    s.read("max_line_search_trials", t.line_search.max_trials);
    s.read("gradient_tolerance", t.gradient_tolerance);
    s.read("random_search_candidates", t.random_search_candidates);
    s.read("random_search_subset", t.random_search_subset);
    s.read("init_range", t.init_range);
    s.read("seed", t.seed);
    s.read("online_max_iterations", t.online_max_iterations);
    s.read("online_budget_ms", t.online_budget_ms);
    s.read("online_max_step", t.online_max_step);
    s.read("online_leak", t.online_leak);
    s.finish();
  }
  if (root.has("fuzzy")) {
    Section s = root.child("fuzzy");
    std::vector<double> alpha(c.online.fuzzy.alpha.begin(), c.online.fuzzy.alpha.end());
    s.read("alpha", alpha);
    if (alpha.size() != kAxes) throw Error(ErrorCode::ConfigError, "fuzzy.alpha needs 3 values");
    std::copy(alpha.begin(), alpha.end(), c.online.fuzzy.alpha.begin());
    s.read("e_scale", c.online.fuzzy.e_scale);
    s.read("de_scale", c.online.fuzzy.de_scale);
    s.finish();
  }
  if (root.has("online")) {
    Section s = root.child("online");
    s.read("buffer_capacity", c.online.buffer_capacity);
    s.read("cadence", c.online.cadence);
    s.read("divergence_threshold", c.online.divergence_threshold);
    s.read("apply_correction", c.online.apply_correction);
    s.finish();
  }
  if (root.has("evaluation")) {
    Section s = root.child("evaluation");
    s.read("trajectories", c.evaluation.trajectories);
    s.read("repetitions", c.evaluation.repetitions);
    s.read("base_seed", c.evaluation.base_seed);
    if (s.has("disturbance")) read_disturbance(s.child("disturbance"), c.evaluation.disturbance);
    s.finish();
  }
  root.read("output_dir", c.output_dir);
  root.finish();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(csv::read_file(path));
}

ExperimentSpec make_experiment(const ExperimentConfig& config, const std::string& trajectory,
                               ControllerKind controller,
                               std::shared_ptr<const ControllerModel> model) {
  ExperimentSpec spec;
  spec.trajectory_name = trajectory;
  spec.trajectory = config.trajectory(trajectory);
  spec.controller = controller;
  spec.plant = config.plant;
  spec.disturbance = config.evaluation.disturbance;
  spec.pid = config.pid;
  spec.model = std::move(model);
  spec.online = config.online;
  spec.trainer = config.trainer;
  return spec;
}

}  // namespace quadlearn
