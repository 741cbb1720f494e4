#pragma once

// Exactly linear lifted system used as ground truth by several tests.
//
// States follow x' = A x + b u. The lifting is [x; W x] = C x (identity
// activation, single affine layer, zero bias), so lifted dynamics are exactly
// linear with K = C A C^+ + 0.5 (I - C C^+) and B = C b. The second term
// makes K act on the whole lifted space, so K is identifiable from generic
// lifted data while trajectories that start on the lifting manifold stay on it.

#include <random>

#include <Eigen/Dense>

#include "rldk/datagen.hpp"
#include "rldk/edmd.hpp"
#include "rldk/lifting.hpp"

namespace rldk::testing {

struct LinearOracle {
  Eigen::Matrix2d A;
  Eigen::Vector2d b;
  KoopmanModel model;  // exact K, B with the matching lifting
};

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                                      double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

inline LinearOracle make_linear_oracle(std::uint64_t seed, Eigen::Index observables = 4,
                                       double dt = 0.01) {
  Rng rng = make_stream_rng(seed, 0);
  LinearOracle o;
  const double c = std::cos(0.1), s = std::sin(0.1);
  o.A << 0.97 * c, -0.97 * s, 0.97 * s, 0.97 * c;
  o.b << 0.0, 0.1;

  Mlp net({2, observables}, Activation::identity);
  net.weight(0) = uniform_matrix(observables, 2, rng);
  const Eigen::Index d = 2 + observables;
  Eigen::MatrixXd C(d, 2);
  C << Eigen::Matrix2d::Identity(), net.weight(0);
  const Eigen::MatrixXd C_pinv = (C.transpose() * C).inverse() * C.transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  o.model.net = std::move(net);
  o.model.K = C * o.A * C_pinv + 0.5 * (I - C * C_pinv);
  o.model.B = C * o.b;
  o.model.dt = dt;
  return o;
}

/// Noiseless trajectory of the state-space system under uniform(-1, 1) inputs.
inline Trajectory oracle_trajectory(const LinearOracle& o, const Eigen::Vector2d& x0,
                                    Eigen::Index steps, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Trajectory t;
  t.dt = o.model.dt;
  t.states_x.resize(2, steps);
  t.states_y.resize(2, steps);
  t.inputs.resize(1, steps);
  Eigen::Vector2d x = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    t.inputs(0, k) = u(rng);
    t.states_x.col(k) = x;
    x = o.A * x + o.b * t.inputs(0, k);
    t.states_y.col(k) = x;
  }
  return t;
}

}  // namespace rldk::testing
