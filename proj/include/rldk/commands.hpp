#pragma once

#include <ostream>

#include <Eigen/Dense>

#include "rldk/control.hpp"
#include "rldk/datagen.hpp"
#include "rldk/run_config.hpp"
#include "rldk/training.hpp"

namespace rldk {

// Each command writes its artifacts under the configured paths and prints a
// short human-readable summary to `log`.

/// Generates the dataset and writes <dataset>.
Dataset cmd_datagen(const RunConfig& cfg, std::ostream& log);

/// Trains `training.variant` on the dataset (generated first if the file is
/// missing); writes the model JSON and report_<variant>.csv.
TrainingResult cmd_train(const RunConfig& cfg, std::ostream& log);

struct RolloutTrace {
  std::vector<double> times;
  Eigen::MatrixXd truth;      // n x (horizon + 1), noiseless
  Eigen::MatrixXd predicted;  // n x (horizon + 1)
};

/// Self-propagated prediction from x0 against the true pendulum; writes rollout.csv.
RolloutTrace cmd_rollout(const RunConfig& cfg, std::ostream& log);

struct LqrRun {
  LqrGain gain;
  Eigen::VectorXcd eigenvalues;
  SimulationResult trace;
};

/// Computes the gain, persists it into the model JSON and writes lqr.csv.
LqrRun cmd_lqr(const RunConfig& cfg, std::ostream& log);

struct Comparison {
  EvaluationMetrics rldk;
  EvaluationMetrics autoencoder;
};

/// Evaluates both models on the test split; writes compare.csv and
/// compare_summary.csv.
Comparison cmd_compare(const RunConfig& cfg, std::ostream& log);

/// Input sequence (1 x steps) for a rollout policy: zero, const:<v>, random, bang_bang.
Eigen::MatrixXd input_sequence(std::string_view policy, std::size_t steps, std::uint64_t seed);

}  // namespace rldk
