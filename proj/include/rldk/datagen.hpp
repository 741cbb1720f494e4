#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rldk/dynamics.hpp"

namespace rldk {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` of a run seeded with `seed`.
Rng make_stream_rng(std::uint64_t seed, std::uint64_t stream);

enum class Excitation { uniform, bang_bang };

const char* to_string(Excitation e);
Excitation excitation_from_string(std::string_view name);

/// One recorded run: column k of states_y is the (noisy) successor of column
/// k of states_x under inputs column k.
struct Trajectory {
  std::size_t id = 0;
  double dt = 0.0;
  Eigen::MatrixXd states_x;  // n x M
  Eigen::MatrixXd states_y;  // n x M
  Eigen::MatrixXd inputs;    // p x M

  Eigen::Index size() const { return states_x.cols(); }
  bool operator==(const Trajectory&) const = default;
};

struct DatasetConfig {
  std::size_t n_ic = 8000;
  double t_final = 2.0;
  double dt = 0.01;
  double noise_std = 0.01;
  double ic_range = 2.0;
  Excitation excitation = Excitation::uniform;
  PendulumParams params{};
  std::uint64_t seed = 42;
  /// Worker threads for generation; 0 picks hardware concurrency. Output does
  /// not depend on this value.
  unsigned threads = 0;

  /// Compares everything that affects the generated data (not `threads`).
  bool operator==(const DatasetConfig& o) const;
};

struct Dataset {
  DatasetConfig config;
  std::vector<Trajectory> train;
  std::vector<Trajectory> validation;
  std::vector<Trajectory> test;

  std::size_t size() const { return train.size() + validation.size() + test.size(); }
  bool operator==(const Dataset&) const = default;
};

/// Stacked columns of many trajectories.
struct SnapshotSet {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Xp;
  Eigen::MatrixXd U;
};

/// Uniform draw on [-ic_range, ic_range] per component plus N(0, noise_std^2).
Eigen::Vector2d random_initial_condition(Rng& rng, double ic_range = 2.0, double noise_std = 0.01);

/// Randomly excited, noisy pendulum run. The noisy successor is both
/// recorded and carried forward as the next state.
Trajectory generate_trajectory(const Eigen::Vector2d& x0, double t_final, double dt,
                               double noise_std, Rng& rng, const PendulumParams& params,
                               Excitation excitation = Excitation::uniform);

/// Variant with an externally supplied input sequence (1 x M); no inputs drawn.
Trajectory generate_trajectory(const Eigen::Vector2d& x0, const Eigen::MatrixXd& inputs,
                               double dt, double noise_std, Rng& rng,
                               const PendulumParams& params);

/// n_ic trajectories split 80/10/10 by trajectory after a seeded shuffle.
/// Trajectory i draws from stream i, so thread count never changes the result.
Dataset build_dataset(const DatasetConfig& config);

struct SplitSizes {
  std::size_t train, validation, test;
};
SplitSizes split_sizes(std::size_t n_ic);

SnapshotSet snapshot_matrices(const std::vector<Trajectory>& trajs);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(std::string_view text);

}  // namespace rldk
