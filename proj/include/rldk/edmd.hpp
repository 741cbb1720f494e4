#pragma once

#include <optional>

#include <Eigen/Dense>

#include "rldk/lifting.hpp"

namespace rldk {

/// Moore-Penrose inverse by SVD; singular values below rcond * sigma_max are
/// treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& M, double rcond = 1e-10);

struct KoopmanFit {
  Eigen::MatrixXd K;  // d x d
  Eigen::MatrixXd B;  // d x p
};

/// Least-squares [K B] = V W^T (W W^T)^+ with W = [Phi_x; U], V = Phi_y.
KoopmanFit fit_koopman(const Eigen::MatrixXd& Phi_x, const Eigen::MatrixXd& Phi_y,
                       const Eigen::MatrixXd& U, double rcond = 1e-10);

/// Lifted linear model together with the lifting that defines its coordinates.
///
/// With no decoder the lifting is [x; net(x)] and states are read back from
/// the first n rows. The autoencoder baseline instead lifts with net(x) alone
/// and reads states back through `decoder`.
struct KoopmanModel {
  Eigen::MatrixXd K;
  Eigen::MatrixXd B;
  Mlp net;
  std::optional<Mlp> decoder;
  double dt = 0.01;

  Eigen::Index state_dim() const { return net.input_dim(); }
  Eigen::Index lifted_dim() const { return K.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  bool concatenates_state() const { return !decoder.has_value(); }

  /// Throws ShapeError if K, B and the lifting disagree.
  void validate() const;
  bool operator==(const KoopmanModel&) const = default;
};

ObservableVector lift(const KoopmanModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd lift_batch(const KoopmanModel& model, const Eigen::MatrixXd& X);

/// K phi + B u.
ObservableVector predict_step(const KoopmanModel& model, const ObservableVector& phi,
                              const Eigen::VectorXd& u);

/// Projection onto the first n coordinates.
Eigen::VectorXd extract_state(const ObservableVector& phi_hat, Eigen::Index n);
/// Projection for concatenating models, decoder for the baseline.
Eigen::VectorXd extract_state(const KoopmanModel& model, const ObservableVector& phi_hat);
Eigen::MatrixXd extract_states(const KoopmanModel& model, const Eigen::MatrixXd& lifted);

struct RolloutOptions {
  bool correct = true;
  double blowup_norm = 1e6;
};

/// States x_0..x_T under inputs u_seq (p x T). With correction the state is
/// extracted and re-lifted every step; without it the lifted vector is
/// propagated linearly and only projected for output.
Eigen::MatrixXd rollout(const KoopmanModel& model, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& u_seq, const RolloutOptions& options = {});

}  // namespace rldk
