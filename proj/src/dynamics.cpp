#include "rldk/dynamics.hpp"

#include <cmath>
#include <string>

#include "rldk/errors.hpp"

namespace rldk {

void PendulumParams::validate() const {
  if (!(std::isfinite(gravity) && gravity > 0.0)) {
    throw DomainError("pendulum gravity must be finite and positive");
  }
  if (!(std::isfinite(length) && length > 0.0)) {
    throw DomainError("pendulum length must be finite and positive");
  }
}

Eigen::Vector2d pendulum_deriv(const Eigen::Vector2d& x, double u, const PendulumParams& params) {
  if (!x.allFinite() || !std::isfinite(u)) {
    throw DomainError("pendulum_deriv: non-finite state or input");
  }
  return {x(1), -params.ratio() * std::sin(x(0)) + u};
}

DerivFn pendulum_rhs(const PendulumParams& params) {
  params.validate();
  return [params](double, const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    if (x.size() != 2 || u.size() != 1) {
      throw ShapeError("pendulum expects a 2-state, 1-input system");
    }
    return pendulum_deriv(Eigen::Vector2d(x(0), x(1)), u(0), params);
  };
}

Eigen::VectorXd rk4_step(const DerivFn& f, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt) {
  if (!(dt > 0.0)) {
    throw DomainError("rk4_step: dt must be positive");
  }
  const double half = 0.5 * dt;
  const auto checked = [](Eigen::VectorXd k, int stage) {
    if (!k.allFinite()) {
      throw IntegrationError("rk4_step: non-finite stage k" + std::to_string(stage));
    }
    return k;
  };
  const Eigen::VectorXd k1 = checked(f(t, x, u), 1);
  const Eigen::VectorXd k2 = checked(f(t + half, x + half * k1, u), 2);
  const Eigen::VectorXd k3 = checked(f(t + half, x + half * k2, u), 3);
  const Eigen::VectorXd k4 = checked(f(t + dt, x + dt * k3, u), 4);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::size_t step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw DomainError("step_count: t_final and dt must be positive");
  }
  return static_cast<std::size_t>(std::floor(t_final / dt + 1e-9));
}

ControlLaw zero_input(Eigen::Index input_dim) {
  return [input_dim](std::size_t, double, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(input_dim).eval();
  };
}

ControlLaw open_loop(Eigen::MatrixXd inputs) {
  return [inputs = std::move(inputs)](std::size_t k, double, const Eigen::VectorXd&) {
    if (static_cast<Eigen::Index>(k) >= inputs.cols()) {
      throw DomainError("open_loop: input sequence exhausted at step " + std::to_string(k));
    }
    return Eigen::VectorXd(inputs.col(static_cast<Eigen::Index>(k)));
  };
}

SimulationResult simulate(const DerivFn& f, const Eigen::VectorXd& x0, Eigen::Index input_dim,
                          const ControlLaw& law, double t_final, double dt,
                          const SimulateOptions& options) {
  if (!(t_final > 0.0) || !(dt > 0.0)) {
    throw DomainError("simulate: t_final and dt must be positive");
  }
  if (!x0.allFinite()) {
    throw DomainError("simulate: non-finite initial state");
  }
  const std::size_t steps = step_count(t_final, dt);
  const auto cols = static_cast<Eigen::Index>(steps);

  SimulationResult out;
  out.times.reserve(steps + 1);
  out.states.resize(x0.size(), cols + 1);
  out.inputs.resize(input_dim, cols);
  out.states.col(0) = x0;
  out.times.push_back(0.0);

  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Eigen::VectorXd u = law(k, t, x);
    if (u.size() != input_dim) {
      throw ShapeError("simulate: control law returned wrong input dimension");
    }
    x = rk4_step(f, t, x, u, dt);
    if (!(x.norm() <= options.blowup_norm)) {
      throw DivergenceError("simulate: state norm exceeded " +
                            std::to_string(options.blowup_norm) + " at step " +
                            std::to_string(k + 1));
    }
    const auto col = static_cast<Eigen::Index>(k);
    out.inputs.col(col) = u;
    out.states.col(col + 1) = x;
    out.times.push_back(static_cast<double>(k + 1) * dt);
  }
  return out;
}

SimulationResult simulate_pendulum(const Eigen::Vector2d& x0, const ControlLaw& law,
                                   double t_final, double dt, const PendulumParams& params,
                                   const SimulateOptions& options) {
  return simulate(pendulum_rhs(params), x0, 1, law, t_final, dt, options);
}

double pendulum_energy(const Eigen::Vector2d& x, const PendulumParams& params) {
  return (1.0 - std::cos(x(0))) * params.ratio() + 0.5 * x(1) * x(1);
}

}  // namespace rldk
