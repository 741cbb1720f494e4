#include "rldk/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rldk/errors.hpp"

namespace rldk {

ContinuousModel to_continuous(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B, double dt) {
  if (!(dt > 0.0)) throw DomainError("to_continuous: dt must be positive");
  if (K.rows() != K.cols() || B.rows() != K.rows()) throw ShapeError("to_continuous: bad K/B shapes");
  ContinuousModel cm;
  cm.A = (K - Eigen::MatrixXd::Identity(K.rows(), K.cols())) / dt;
  cm.B_con = B / dt;
  cm.dt_source = dt;
  return cm;
}

ContinuousModel to_continuous(const KoopmanModel& model) {
  return to_continuous(model.K, model.B, model.dt);
}

LqrWeights default_weights(Eigen::Index lifted_dim, Eigen::Index state_dim, Eigen::Index input_dim,
                           double q_scale, double r_scale) {
  LqrWeights w;
  w.Q = Eigen::MatrixXd::Zero(lifted_dim, lifted_dim);
  w.Q.topLeftCorner(state_dim, state_dim).diagonal().setConstant(q_scale);
  w.R = r_scale * Eigen::MatrixXd::Identity(input_dim, input_dim);
  return w;
}

Eigen::MatrixXd care_defect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                            const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd S = B * R.llt().solve(B.transpose());
  return A.transpose() * P + P * A - P * S * P + Q;
}

namespace {

void check_weights(const LqrWeights& w, Eigen::Index d, Eigen::Index p) {
  if (w.Q.rows() != d || w.Q.cols() != d || w.R.rows() != p || w.R.cols() != p) {
    throw ShapeError("lqr_gain: Q must be d x d and R must be p x p");
  }
  const double q_norm = std::max(1.0, w.Q.norm());
  if ((w.Q - w.Q.transpose()).norm() > 1e-12 * q_norm) throw DomainError("lqr_gain: Q not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(w.Q);
  if (q_eig.eigenvalues().minCoeff() < -1e-12 * q_norm) {
    throw DomainError("lqr_gain: Q is not positive semidefinite");
  }
  if ((w.R - w.R.transpose()).norm() > 1e-12 * std::max(1.0, w.R.norm())) {
    throw DomainError("lqr_gain: R not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(w.R);
  if (!(r_eig.eigenvalues().minCoeff() > 0.0)) throw DomainError("lqr_gain: R is not positive definite");
}

}  // namespace

constexpr double kRiccatiBlowup = 1e100;

LqrGain lqr_gain(const ContinuousModel& cm, const LqrWeights& w, const LqrOptions& options) {
  const Eigen::Index d = cm.A.rows();
  const Eigen::Index p = cm.B_con.cols();
  if (cm.A.cols() != d || cm.B_con.rows() != d) throw ShapeError("lqr_gain: bad A/B shapes");
  check_weights(w, d, p);
  if (!cm.A.allFinite() || !cm.B_con.allFinite()) throw DomainError("lqr_gain: non-finite model");

  const Eigen::MatrixXd& A = cm.A;
  const Eigen::MatrixXd At = A.transpose();
  const Eigen::MatrixXd S = cm.B_con * w.R.llt().solve(cm.B_con.transpose());
  const auto flow = [&](const Eigen::MatrixXd& P) -> Eigen::MatrixXd {
    return At * P + P * A - P * S * P + w.Q;
  };
  // Size of the terms that cancel in flow(P); the stopping test is relative
  // to it because the absolute derivative cannot fall below their roundoff.
  const double a_norm = cm.A.norm();
  const auto converged = [&](const Eigen::MatrixXd& P, const Eigen::MatrixXd& dP) {
    const Eigen::MatrixXd PA = P * A;
    const double scale = 1.0 + 2.0 * PA.norm() + (P * S * P).norm() + w.Q.norm();
    return dP.norm() < options.derivative_tol * scale;
  };
  const auto rk4 = [&](const Eigen::MatrixXd& P, const Eigen::MatrixXd& k1, double h) {
    const Eigen::MatrixXd k2 = flow(P + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = flow(P + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = flow(P + h * k3);
    Eigen::MatrixXd next = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return (0.5 * (next + next.transpose())).eval();
  };

  // Step-doubling RK4: the step grows through the slow tail of the flow and
  // is held back near RK4's stability limit by the error estimate.
  Eigen::MatrixXd P = options.initial_scale * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd dP = flow(P);
  double h = 0.25 / (1.0 + 2.0 * a_norm + 2.0 * (S * P).norm());
  long step = 0;
  long attempts = 0;
  const long max_attempts = 4 * options.max_steps;
  while (step < options.max_steps && !converged(P, dP)) {
    if (++attempts > max_attempts) break;
    const Eigen::MatrixXd full = rk4(P, dP, h);
    const Eigen::MatrixXd half = rk4(P, dP, 0.5 * h);
    const Eigen::MatrixXd two_halves = rk4(half, flow(half), 0.5 * h);
    const double err = (two_halves - full).norm() / (1.0 + P.norm());
    if (!two_halves.allFinite() || !(err <= options.step_tol)) {
      h *= 0.5;
      if (h < 1e-14) {
        throw RiccatiError("lqr_gain: Riccati flow step size underflow at step " + std::to_string(step),
                           std::numeric_limits<double>::infinity());
      }
      continue;
    }
    P = two_halves;
    dP = flow(P);
    ++step;
    // Unbounded growth: no stabilising solution (an unstable mode the input
    // cannot reach).
    if (!(P.norm() < kRiccatiBlowup)) {
      throw RiccatiError("lqr_gain: Riccati flow diverged at step " + std::to_string(step) +
                             " (model not stabilisable?)",
                         std::numeric_limits<double>::infinity());
    }
    const double grow = err > 0.0 ? 0.9 * std::pow(options.step_tol / err, 0.2) : 2.0;
    h *= std::clamp(grow, 0.5, 2.0);
  }

  LqrGain gain;
  gain.riccati_solution = P;
  gain.iterations = step;
  gain.residual = care_defect(cm.A, cm.B_con, w.Q, w.R, P).norm() / (1.0 + P.norm());
  if (!converged(P, dP) || !(gain.residual < options.residual_tol)) {
    throw RiccatiError("lqr_gain: Riccati flow did not converge within " +
                           std::to_string(options.max_steps) + " steps (relative residual " +
                           std::to_string(gain.residual) + ")",
                       gain.residual);
  }
  gain.K_lqr = w.R.llt().solve(cm.B_con.transpose() * P);
  return gain;
}

Eigen::VectorXcd closed_loop_eigenvalues(const ContinuousModel& cm, const LqrGain& gain) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(cm.A - cm.B_con * gain.K_lqr, false).eigenvalues();
}

Eigen::VectorXd compute_control(const LqrGain& gain, const ObservableVector& phi, double u_clamp) {
  if (phi.size() != gain.K_lqr.cols()) throw ShapeError("compute_control: lifted dimension mismatch");
  return (-gain.K_lqr * phi.values()).cwiseMax(-u_clamp).cwiseMin(u_clamp);
}

Eigen::VectorXd compute_control(const LqrGain& gain, const ObservableVector& phi,
                                const ObservableVector& phi_ref, double u_clamp) {
  if (phi_ref.size() != phi.size()) throw ShapeError("compute_control: reference dimension mismatch");
  return compute_control(gain, ObservableVector(phi.values() - phi_ref.values()), u_clamp);
}

SimulationResult closed_loop_sim(const KoopmanModel& model, const LqrGain& gain,
                                 const Eigen::Vector2d& x0, double t_final, double dt,
                                 const PendulumParams& params, const ClosedLoopOptions& options) {
  if (gain.K_lqr.cols() != model.lifted_dim() || gain.K_lqr.rows() != model.input_dim()) {
    throw ShapeError("closed_loop_sim: gain and model dimensions differ");
  }
  const ObservableVector phi_ref =
      options.reference_offset ? lift(model, Eigen::VectorXd::Zero(model.state_dim()))
                               : ObservableVector(Eigen::VectorXd::Zero(model.lifted_dim()));
  const ControlLaw law = [&](std::size_t, double, const Eigen::VectorXd& x) {
    return compute_control(gain, lift(model, x), phi_ref, options.u_clamp);
  };
  return simulate_pendulum(x0, law, t_final, dt, params, SimulateOptions{options.blowup_norm});
}

}  // namespace rldk
