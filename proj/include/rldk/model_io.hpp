#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rldk/control.hpp"
#include "rldk/edmd.hpp"

namespace rldk {

/// Gain persisted alongside a model under the "controller" key.
struct ControllerRecord {
  LqrGain gain;
  LqrWeights weights;
};

struct ModelFile {
  KoopmanModel model;
  std::optional<ControllerRecord> controller;
};

/// JSON document: dimensions, lifting network(s) with row-major weights,
/// K and B, and the optional controller.
std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(std::string_view text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace rldk
