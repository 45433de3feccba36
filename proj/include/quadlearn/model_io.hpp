#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quadlearn/network.hpp"
#include "quadlearn/pid.hpp"

namespace quadlearn {

using Provenance = std::map<std::string, std::string>;

/// Three axis networks (x -> pitch, y -> negated roll, z -> vertical velocity).
struct ControllerModel {
  std::array<AxisNetwork, kAxes> nets;
  Provenance provenance;

  friend bool operator==(const ControllerModel&, const ControllerModel&) = default;
};

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document. Doubles are written in shortest round-trip form,
/// so deserialize(serialize(m)) == m bit for bit.
std::string serialize_model(const ControllerModel& model);
ControllerModel deserialize_model(std::string_view text);

void save_model(const ControllerModel& model, const std::filesystem::path& path);
ControllerModel load_model(const std::filesystem::path& path);

struct Dataset {
  std::array<std::vector<TrainingSample>, kAxes> axes;
  Provenance provenance;

  std::size_t rows_per_axis() const { return axes[0].size(); }
  /// Non-empty with equal per-axis sizes and finite values.
  void validate() const;
};

/// Delimited text with header `axis,e_k,e_k1,e_k2,de_k,de_k1,de_k2,target`,
/// one sample per row; axis is x, y or z. Provenance goes to a JSON sidecar
/// at `<path>.meta.json`.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(std::string_view text);

char axis_name(std::size_t axis);

}  // namespace quadlearn
