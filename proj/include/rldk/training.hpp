#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rldk/datagen.hpp"
#include "rldk/edmd.hpp"
#include "rldk/lifting.hpp"

namespace rldk {

enum class Variant { rldk, autoencoder };

const char* to_string(Variant v);
Variant variant_from_string(std::string_view name);

struct TrainingConfig {
  int epochs = 20;
  std::size_t batch_size = 256;  // trajectories per batch
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  std::vector<Eigen::Index> hidden{32, 32};
  Eigen::Index lifted_dim = 8;  // N network observables
  Activation activation = Activation::tanh;
  double rcond = 1e-10;
  Variant variant = Variant::rldk;
  double pred_weight = 1.0;   // autoencoder only
  double recon_weight = 1.0;  // autoencoder only

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double total_seconds = 0.0;
};

struct TrainingResult {
  KoopmanModel model;
  TrainingReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean over columns of the squared Euclidean column error.
double prediction_loss(const Eigen::MatrixXd& Phi_hat, const Eigen::MatrixXd& Phi_true);

/// Trajectory indices per batch for one epoch, shuffled with `rng`. Both
/// trainers draw their schedules from this function.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n_trajectories,
                                                   std::size_t batch_size, Rng& rng);

/// Recursive learning: each batch refits [K B] by least squares on the
/// current lifting, and the prediction loss is backpropagated into the
/// network with K and B held fixed.
TrainingResult train_rldk(const Dataset& dataset, const TrainingConfig& config,
                          const EpochCallback& on_epoch = {});

/// Encoder/decoder baseline sharing the batch schedule, optimiser and
/// least-squares step; adds a state-reconstruction term to the loss.
TrainingResult train_autoencoder(const Dataset& dataset, const TrainingConfig& config,
                                 const EpochCallback& on_epoch = {});

/// Dispatches on config.variant.
TrainingResult train(const Dataset& dataset, const TrainingConfig& config,
                     const EpochCallback& on_epoch = {});

struct EvaluationMetrics {
  double one_step_lifted_mse = 0.0;
  double one_step_state_mse = 0.0;
  /// Mean over trajectories of |rollout - truth|, n x (horizon + 1).
  Eigen::MatrixXd abs_error;
  double mean_abs_error = 0.0;    // over trajectories, times and states
  Eigen::VectorXd max_abs_error;  // per state, over trajectories and times
};

/// One-step errors and corrected multi-step rollout errors against the
/// recorded successors of each trajectory.
EvaluationMetrics evaluate(const KoopmanModel& model, const std::vector<Trajectory>& trajectories,
                           Eigen::Index horizon);

/// Refits K and B for `net` (and optional decoder) on every transition in `trajs`.
KoopmanModel fit_model(const Mlp& net, std::optional<Mlp> decoder, const std::vector<Trajectory>& trajs,
                       double rcond);
KoopmanModel fit_model(const Mlp& net, std::optional<Mlp> decoder, const SnapshotSet& data,
                       double dt, double rcond);

void save_report(const TrainingReport& report, const std::filesystem::path& path);
TrainingReport load_report(const std::filesystem::path& path);

}  // namespace rldk
