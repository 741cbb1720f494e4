#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rldk/dynamics.hpp"
#include "rldk/errors.hpp"

using namespace rldk;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }
VectorXd no_input() { return VectorXd::Zero(1); }

}  // namespace

TEST_CASE("pendulum_deriv: hand values") {
  const PendulumParams p;
  CHECK(pendulum_deriv({0, 0}, 0.0, p) == Vector2d(0, 0));
  const Vector2d d = pendulum_deriv({std::numbers::pi / 2, 0}, 0.0, p);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == doctest::Approx(-9.81).epsilon(1e-15));
  CHECK(pendulum_deriv({0, 0}, 1.0, p) == Vector2d(0, 1));
  // theta_dot feeds the first component directly
  CHECK(pendulum_deriv({0, 2.5}, 0.0, p)(0) == 2.5);
}

TEST_CASE("pendulum_deriv: rejects bad input") {
  const PendulumParams p;
  CHECK_THROWS_AS(pendulum_deriv({NAN, 0}, 0.0, p), DomainError);
  CHECK_THROWS_AS(pendulum_deriv({0, 0}, INFINITY, p), DomainError);
  CHECK_THROWS_AS((PendulumParams{9.81, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PendulumParams{-1.0, 1.0}.validate()), DomainError);
}

TEST_CASE("rk4_step: zero field leaves state unchanged") {
  const DerivFn zero = [](double, const VectorXd& x, const VectorXd&) {
    return VectorXd::Zero(x.size());
  };
  VectorXd x(3);
  x << 1.5, -2.0, 7.0;
  CHECK(rk4_step(zero, 0.0, x, no_input(), 0.3) == x);
}

TEST_CASE("rk4_step: linear decay equals the 4th-order Taylor polynomial") {
  const DerivFn decay = [](double, const VectorXd& x, const VectorXd&) -> VectorXd { return -x; };
  const double dt = 0.1;
  const double taylor = 1 - dt + dt * dt / 2 - std::pow(dt, 3) / 6 + std::pow(dt, 4) / 24;
  const double got = rk4_step(decay, 0.0, scalar(1.0), no_input(), dt)(0);
  CHECK(got == doctest::Approx(taylor).epsilon(1e-15));
  CHECK(std::abs(got - 0.90483750) < 5e-9);
}

TEST_CASE("rk4_step: one step vs two half steps on the pendulum") {
  const DerivFn f = pendulum_rhs({});
  VectorXd x0(2);
  x0 << 1.0, 0.0;
  const VectorXd full = rk4_step(f, 0.0, x0, no_input(), 0.01);
  const VectorXd half = rk4_step(f, 0.005, rk4_step(f, 0.0, x0, no_input(), 0.005), no_input(), 0.005);
  CHECK((full - half).norm() < 1e-9);
}

TEST_CASE("rk4_step: errors") {
  const DerivFn f = pendulum_rhs({});
  const VectorXd x = Vector2d(1, 0);
  CHECK_THROWS_AS(rk4_step(f, 0.0, x, no_input(), 0.0), DomainError);
  CHECK_THROWS_AS(rk4_step(f, 0.0, x, no_input(), -0.1), DomainError);
  const DerivFn blow = [](double, const VectorXd& x, const VectorXd&) -> VectorXd {
    return x.array().exp().exp();
  };
  CHECK_THROWS_AS(rk4_step(blow, 0.0, Vector2d(10, 10), no_input(), 1.0), IntegrationError);
}

TEST_CASE("simulate: sample count and equilibrium") {
  const SimulationResult r = simulate_pendulum({0, 0}, zero_input(1), 2.0, 0.01, {});
  CHECK(r.times.size() == 201);
  CHECK(r.states.cols() == 201);
  CHECK(r.inputs.cols() == 200);
  CHECK(r.states.isZero(0.0));
  CHECK(r.times.back() == doctest::Approx(2.0));
  CHECK(step_count(2.0, 0.01) == 200);
  CHECK(step_count(1.0, 0.1) == 10);
}

TEST_CASE("simulate: undriven energy is conserved") {
  const PendulumParams p;
  const SimulationResult r = simulate_pendulum({1, 0}, zero_input(1), 2.0, 0.01, p);
  const double e0 = pendulum_energy(r.states.col(0), p);
  double drift = 0.0;
  for (Eigen::Index k = 0; k < r.states.cols(); ++k) {
    drift = std::max(drift, std::abs(pendulum_energy(r.states.col(k), p) - e0));
  }
  CHECK(drift / e0 < 1e-6);
}

TEST_CASE("simulate: convergence order on the undriven pendulum") {
  // Reference at dt/64 of the finest step; error ratios of successive halvings
  // approach 2^4.
  const auto end_state = [](double dt) {
    return Vector2d(simulate_pendulum({1, 0}, zero_input(1), 1.0, dt, {}).states.rightCols(1));
  };
  const Vector2d ref = end_state(0.01 / 64);
  const double e1 = (end_state(0.04) - ref).norm();
  const double e2 = (end_state(0.02) - ref).norm();
  const double e3 = (end_state(0.01) - ref).norm();
  CHECK(e1 / e2 > 14.0);
  CHECK(e1 / e2 < 18.0);
  CHECK(e2 / e3 > 14.0);
  CHECK(e2 / e3 < 18.0);
}

TEST_CASE("simulate: open-loop replay is bit-reproducible") {
  Eigen::MatrixXd u(1, 150);
  for (Eigen::Index k = 0; k < u.cols(); ++k) u(0, k) = std::sin(0.37 * static_cast<double>(k));
  const auto a = simulate_pendulum({0.4, -0.3}, open_loop(u), 1.5, 0.01, {});
  const auto b = simulate_pendulum({0.4, -0.3}, open_loop(u), 1.5, 0.01, {});
  CHECK(a.states == b.states);
  CHECK(a.inputs == u);
}

TEST_CASE("simulate: control is applied as additive acceleration") {
  // Constant u = g/l * sin(theta0) holds the pendulum at rest at theta0.
  const PendulumParams p;
  const double th = 0.3;
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(1, 100, p.ratio() * std::sin(th));
  const auto r = simulate_pendulum({th, 0}, open_loop(u), 1.0, 0.01, p);
  CHECK((r.states.row(0).array() - th).abs().maxCoeff() < 1e-12);
}

TEST_CASE("simulate: divergence is reported") {
  const DerivFn f = [](double, const VectorXd& x, const VectorXd&) -> VectorXd { return 5.0 * x; };
  SimulateOptions opts;
  opts.blowup_norm = 1e3;
  CHECK_THROWS_AS(simulate(f, Vector2d(1, 1), 1, zero_input(1), 10.0, 0.01, opts), DivergenceError);
}
