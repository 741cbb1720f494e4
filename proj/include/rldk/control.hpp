#pragma once

#include <Eigen/Dense>

#include "rldk/dynamics.hpp"
#include "rldk/edmd.hpp"

namespace rldk {

/// Continuous-time surrogate A = (K - I)/dt, B_con = B/dt.
struct ContinuousModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B_con;
  double dt_source = 0.0;
};

ContinuousModel to_continuous(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B, double dt);
ContinuousModel to_continuous(const KoopmanModel& model);

struct LqrWeights {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

/// Q = q_scale on the first n diagonal entries and zero on the lifted tail,
/// R = r_scale * I.
LqrWeights default_weights(Eigen::Index lifted_dim, Eigen::Index state_dim, Eigen::Index input_dim,
                           double q_scale = 1.0, double r_scale = 1.0);

struct LqrGain {
  Eigen::MatrixXd K_lqr;              // p x d
  Eigen::MatrixXd riccati_solution;   // d x d
  double residual = 0.0;              // ||CARE(P)||_F / (1 + ||P||_F)
  long iterations = 0;
};

struct LqrOptions {
  /// Stop when ||dP/dt||_F < derivative_tol * (1 + 2||P A|| + ||P B R^-1 B^T P|| + ||Q||).
  double derivative_tol = 1e-10;
  long max_steps = 1'000'000;
  double residual_tol = 1e-7;
  /// Local error bound per step, relative to 1 + ||P||_F.
  double step_tol = 1e-10;
  /// Initial condition of the backward Riccati flow is `initial_scale * I`.
  double initial_scale = 0.0;
};

/// A^T P + P A - P B R^-1 B^T P + Q.
Eigen::MatrixXd care_defect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                            const Eigen::MatrixXd& P);

/// Continuous LQR gain K = R^-1 B^T P with P from the algebraic Riccati
/// equation, obtained as the steady state of the Riccati differential
/// equation integrated backward in time with RK4.
LqrGain lqr_gain(const ContinuousModel& cm, const LqrWeights& w, const LqrOptions& options = {});

Eigen::VectorXcd closed_loop_eigenvalues(const ContinuousModel& cm, const LqrGain& gain);

/// u = -K_lqr phi, each component clamped to [-u_clamp, u_clamp].
Eigen::VectorXd compute_control(const LqrGain& gain, const ObservableVector& phi,
                                double u_clamp = 10.0);

/// u = -K_lqr (phi - phi_ref), clamped. phi_ref is the lift of the set point.
Eigen::VectorXd compute_control(const LqrGain& gain, const ObservableVector& phi,
                                const ObservableVector& phi_ref, double u_clamp = 10.0);

struct ClosedLoopOptions {
  double u_clamp = 10.0;
  double blowup_norm = 1e6;
  /// Regulate phi(x) - phi(0) instead of phi(x). The two coincide when the
  /// lifting maps the origin to zero; otherwise the raw form settles at an
  /// offset where -K_lqr phi(x) balances gravity.
  bool reference_offset = true;
};

/// Regulates the true nonlinear pendulum to the origin: lift the measured
/// state with the model's own lifting, apply the gain, integrate one RK4 step.
SimulationResult closed_loop_sim(const KoopmanModel& model, const LqrGain& gain,
                                 const Eigen::Vector2d& x0, double t_final, double dt,
                                 const PendulumParams& params,
                                 const ClosedLoopOptions& options = {});

}  // namespace rldk
