#include "quadlearn/model_io.hpp"

#include <cmath>
#include <json.hpp>

#include "quadlearn/csv.hpp"
#include "quadlearn/error.hpp"

namespace quadlearn {

using nlohmann::json;

namespace {

constexpr std::string_view kModelFormat = "quadlearn-model";
constexpr std::string_view kDatasetHeader = "axis,e_k,e_k1,e_k2,de_k,de_k1,de_k2,target";

json to_json(const ScalingParams& s) {
  return {{"input_mean", s.input_mean},
          {"input_std", s.input_std},
          {"output_mean", s.output_mean},
          {"output_std", s.output_std},
          {"clamp", s.clamp}};
}

ScalingParams scaling_from_json(const json& j) {
  ScalingParams s;
  s.input_mean = j.at("input_mean").get<std::vector<double>>();
  s.input_std = j.at("input_std").get<std::vector<double>>();
  s.output_mean = j.at("output_mean").get<double>();
  s.output_std = j.at("output_std").get<double>();
  s.clamp = j.at("clamp").get<double>();
  return s;
}

std::size_t axis_index(std::string_view name) {
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  throw Error(ErrorCode::CorruptFile, "unknown axis '" + std::string(name) + "'");
}

}  // namespace

char axis_name(std::size_t axis) { return "xyz"[axis]; }

std::string serialize_model(const ControllerModel& model) {
  const NetworkArchitecture& arch = model.nets[0].architecture();
  json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelFormatVersion;
  doc["architecture"] = {{"inputs", arch.inputs},
                         {"hidden_layers", arch.hidden_layers},
                         {"hidden_width", arch.hidden_width},
                         {"outputs", arch.outputs},
                         {"hidden_activation", "tanh"},
                         {"output_activation", "linear"},
                         {"parameter_count", arch.parameter_count()}};
  json axes = json::array();
  for (std::size_t a = 0; a < kAxes; ++a) {
    const AxisNetwork& net = model.nets[a];
    if (!(net.architecture() == arch)) {
      throw Error(ErrorCode::InvalidArgument, "axis networks must share one architecture");
    }
    const auto p = net.parameters();
    axes.push_back({{"axis", std::string(1, axis_name(a))},
                    {"scaling", to_json(net.scaling())},
                    {"parameters", std::vector<double>(p.begin(), p.end())}});
  }
  doc["axes"] = std::move(axes);
  doc["provenance"] = model.provenance;
  return doc.dump(2) + "\n";
}

ControllerModel deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model file does not parse: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::CorruptFile, "not a model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                  ", expected " +
                                                  std::to_string(kModelFormatVersion));
    }
    const json& a = doc.at("architecture");
    NetworkArchitecture arch;
    arch.inputs = a.at("inputs").get<std::size_t>();
    arch.hidden_layers = a.at("hidden_layers").get<std::size_t>();
    arch.hidden_width = a.at("hidden_width").get<std::size_t>();
    arch.outputs = a.at("outputs").get<std::size_t>();

    ControllerModel model;
    const json& axes = doc.at("axes");
    if (!axes.is_array() || axes.size() != kAxes) {
      throw Error(ErrorCode::CorruptFile, "model must hold exactly three axis networks");
    }
    std::array<bool, kAxes> seen{};
    for (const json& entry : axes) {
      const std::size_t idx = axis_index(entry.at("axis").get<std::string>());
      if (seen[idx]) throw Error(ErrorCode::CorruptFile, "duplicate axis entry");
      seen[idx] = true;
      auto params = entry.at("parameters").get<std::vector<double>>();
      model.nets[idx] = AxisNetwork(arch, scaling_from_json(entry.at("scaling")), std::move(params));
    }
    model.provenance = doc.value("provenance", Provenance{});
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::CorruptFile, e.what());
    throw;
  }
}

void save_model(const ControllerModel& model, const std::filesystem::path& path) {
  csv::write_file(path, serialize_model(model));
}

ControllerModel load_model(const std::filesystem::path& path) {
  return deserialize_model(csv::read_file(path));
}

void Dataset::validate() const {
  if (axes[0].empty()) throw Error(ErrorCode::EmptyBatch, "dataset is empty");
  for (const auto& axis : axes) {
    if (axis.size() != axes[0].size()) {
      throw Error(ErrorCode::InvalidArgument, "per-axis dataset sizes differ");
    }
    for (const auto& s : axis) {
      bool ok = std::isfinite(s.target);
      for (double f : s.features) ok = ok && std::isfinite(f);
      if (!ok) throw Error(ErrorCode::NonFinite, "dataset contains non-finite values");
    }
  }
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out(kDatasetHeader);
  out += '\n';
  const std::size_t rows = data.rows_per_axis();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t a = 0; a < kAxes; ++a) {
      const TrainingSample& s = data.axes[a].at(r);
      out += axis_name(a);
      for (double f : s.features) {
        out += ',';
        csv::append(out, f);
      }
      out += ',';
      csv::append(out, s.target);
      out += '\n';
    }
  }
  return out;
}

Dataset dataset_from_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty() || rows.front() != kDatasetHeader) {
    throw Error(ErrorCode::CorruptFile, "dataset header missing or wrong");
  }
  Dataset data;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cols = csv::split(rows[i]);
    if (cols.size() != 2 + kFeatureCount) {
      throw Error(ErrorCode::CorruptFile, "dataset row " + std::to_string(i) + " has " +
                                              std::to_string(cols.size()) + " columns");
    }
    TrainingSample s;
    for (std::size_t k = 0; k < kFeatureCount; ++k) s.features[k] = csv::parse_double(cols[1 + k]);
    s.target = csv::parse_double(cols.back());
    data.axes[axis_index(cols[0])].push_back(s);
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  csv::write_file(path, dataset_to_csv(data));
  if (!data.provenance.empty()) {
    csv::write_file(path.string() + ".meta.json", json(data.provenance).dump(2) + "\n");
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  Dataset data = dataset_from_csv(csv::read_file(path));
  const std::filesystem::path meta = path.string() + ".meta.json";
  if (std::filesystem::exists(meta)) {
    try {
      data.provenance = json::parse(csv::read_file(meta)).get<Provenance>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptFile, std::string("dataset metadata: ") + e.what());
    }
  }
  return data;
}

}  // namespace quadlearn
