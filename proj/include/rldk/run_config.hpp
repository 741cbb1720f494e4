#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rldk/datagen.hpp"
#include "rldk/training.hpp"

namespace rldk {

/// Everything a CLI run needs. Defaults reproduce the reference experiment.
struct RunConfig {
  DatasetConfig dataset;
  TrainingConfig training;
  std::filesystem::path out = "out";
  std::string dataset_path;         // empty: <out>/dataset.csv
  std::string model_path;           // empty: <out>/model_<variant>.json
  std::string baseline_model_path;  // empty: <out>/model_autoencoder.json

  std::string x0 = "1,0";
  long horizon = 1000;  // rollout steps
  std::string u_policy = "zero";
  bool rollout_correct = true;

  double lqr_t_final = 10.0;
  double q_scale = 1.0;
  double r_scale = 1.0;
  double u_clamp = 10.0;
  bool lqr_reference_offset = true;

  long compare_horizon = 200;
  bool svg = false;

  std::filesystem::path dataset_file() const;
  std::filesystem::path model_file() const;
  std::filesystem::path baseline_model_file() const;
};

struct ConfigKey {
  std::string name;
  std::string description;
  bool is_flag = false;  // boolean switch on the command line
};

/// Every recognised key, in display order.
const std::vector<ConfigKey>& config_keys();

/// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Flat `key = value` lines; '#' starts a comment.
void apply_config_text(RunConfig& cfg, std::string_view text);
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);

std::vector<double> parse_vector(std::string_view text);

}  // namespace rldk
