#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace rldk {

/// Pendulum constants. Control enters as an additive angular acceleration:
/// theta'' = -(g/l) sin(theta) + u.
struct PendulumParams {
  double gravity = 9.81;
  double length = 1.0;

  double ratio() const { return gravity / length; }
  /// Throws DomainError unless both constants are finite and positive.
  void validate() const;
};

/// Right-hand side f(t, x, u) of a controlled ODE.
using DerivFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u)>;

/// State derivative (theta_dot, -(g/l) sin(theta) + u) of the pendulum.
Eigen::Vector2d pendulum_deriv(const Eigen::Vector2d& x, double u, const PendulumParams& params);

/// Wraps pendulum_deriv as a generic DerivFn (n = 2, p = 1).
DerivFn pendulum_rhs(const PendulumParams& params);

/// One classical RK4 step with u held constant over [t, t + dt].
Eigen::VectorXd rk4_step(const DerivFn& f, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

/// Number of whole steps of size dt that fit in t_final (robust to the
/// representation error of decimal step sizes).
std::size_t step_count(double t_final, double dt);

/// Input at step k given time and current state. Covers open-loop sequences
/// and state feedback alike.
using ControlLaw =
    std::function<Eigen::VectorXd(std::size_t k, double t, const Eigen::VectorXd& x)>;

ControlLaw zero_input(Eigen::Index input_dim);
/// Replays the columns of `inputs`; steps past the end throw DomainError.
ControlLaw open_loop(Eigen::MatrixXd inputs);

struct SimulationResult {
  std::vector<double> times;  // steps + 1 entries
  Eigen::MatrixXd states;     // n x (steps + 1)
  Eigen::MatrixXd inputs;     // p x steps; column k drives states.col(k) -> states.col(k+1)
};

struct SimulateOptions {
  double blowup_norm = 1e6;
};

SimulationResult simulate(const DerivFn& f, const Eigen::VectorXd& x0, Eigen::Index input_dim,
                          const ControlLaw& law, double t_final, double dt,
                          const SimulateOptions& options = {});

SimulationResult simulate_pendulum(const Eigen::Vector2d& x0, const ControlLaw& law,
                                   double t_final, double dt, const PendulumParams& params,
                                   const SimulateOptions& options = {});

/// Mechanical energy per unit m l^2 of the undriven pendulum.
double pendulum_energy(const Eigen::Vector2d& x, const PendulumParams& params);

}  // namespace rldk
