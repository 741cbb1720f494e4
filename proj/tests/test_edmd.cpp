#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "linear_oracle.hpp"
#include "rldk/edmd.hpp"
#include "rldk/errors.hpp"

using namespace rldk;
using rldk::testing::make_linear_oracle;
using rldk::testing::uniform_matrix;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_penrose(const MatrixXd& M, const MatrixXd& P) {
  const double tol = 1e-12 * (1.0 + M.norm() * P.norm());
  CHECK((M * P * M - M).norm() < tol);
  CHECK((P * M * P - P).norm() < tol * (1.0 + P.norm()));
  CHECK(((M * P).transpose() - M * P).norm() < tol);
  CHECK(((P * M).transpose() - P * M).norm() < tol);
}

}  // namespace

TEST_CASE("pinv: small cases") {
  CHECK(pinv(Eigen::Matrix2d::Identity()) == Eigen::Matrix2d::Identity());

  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = 2.0;
  Eigen::Matrix2d expected = Eigen::Matrix2d::Zero();
  expected(0, 0) = 0.5;
  CHECK((pinv(d) - expected).norm() < 1e-15);

  const MatrixXd row = MatrixXd::Ones(1, 2);
  const MatrixXd p = pinv(row);
  REQUIRE(p.rows() == 2);
  REQUIRE(p.cols() == 1);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  check_penrose(row, p);

  const MatrixXd empty = pinv(MatrixXd(0, 3));
  CHECK(empty.rows() == 3);
  CHECK(empty.cols() == 0);
}

TEST_CASE("pinv: Penrose conditions on random and rank-deficient matrices") {
  Rng rng = make_stream_rng(1, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd M = uniform_matrix(6, 9, rng);
    check_penrose(M, pinv(M));
    const MatrixXd low = uniform_matrix(7, 3, rng) * uniform_matrix(3, 5, rng);
    check_penrose(low, pinv(low));
  }
}

TEST_CASE("pinv: rcond truncates tiny singular values") {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = 1e-12;
  CHECK(pinv(m)(1, 1) == 0.0);
  CHECK(pinv(m, 1e-14)(1, 1) == doctest::Approx(1e12));
}

TEST_CASE("fit_koopman: identity snapshots return the successor matrix") {
  Rng rng = make_stream_rng(2, 0);
  const MatrixXd M = uniform_matrix(4, 4, rng);
  const KoopmanFit f = fit_koopman(MatrixXd::Identity(4, 4), M, MatrixXd::Zero(1, 4));
  CHECK((f.K - M).norm() < 1e-14);
  CHECK(f.B.isZero(1e-14));
}

TEST_CASE("fit_koopman: scalar linear system") {
  Rng rng = make_stream_rng(3, 0);
  const MatrixXd U = uniform_matrix(1, 50, rng);
  MatrixXd X(1, 50), Y(1, 50);
  double x = 1.0;
  for (Index k = 0; k < 50; ++k) {
    X(0, k) = x;
    x = 0.9 * x + 0.1 * U(0, k);
    Y(0, k) = x;
  }
  const KoopmanFit f = fit_koopman(X, Y, U);
  CHECK(std::abs(f.K(0, 0) - 0.9) < 1e-10);
  CHECK(std::abs(f.B(0, 0) - 0.1) < 1e-10);
}

TEST_CASE("fit_koopman: exact recovery of a lifted linear map") {
  const auto o = make_linear_oracle(4);
  Rng rng = make_stream_rng(4, 1);
  const MatrixXd Phi = uniform_matrix(6, 500, rng), U = uniform_matrix(1, 500, rng);
  const MatrixXd Y = o.model.K * Phi + o.model.B * U;
  const KoopmanFit f = fit_koopman(Phi, Y, U);
  MatrixXd truth(6, 7), got(6, 7);
  truth << o.model.K, o.model.B;
  got << f.K, f.B;
  CHECK((got - truth).norm() / truth.norm() < 1e-8);
}

TEST_CASE("fit_koopman: least-squares optimality probe") {
  Rng rng = make_stream_rng(5, 0);
  const MatrixXd Phi = uniform_matrix(10, 200, rng), Y = uniform_matrix(10, 200, rng);
  const MatrixXd U = uniform_matrix(1, 200, rng);
  const KoopmanFit f = fit_koopman(Phi, Y, U);
  MatrixXd W(11, 200), G(10, 11);
  W << Phi, U;
  G << f.K, f.B;
  const double best = (Y - G * W).norm();
  for (int i = 0; i < 200; ++i) {
    MatrixXd D = uniform_matrix(10, 11, rng);
    D *= 1e-3 / D.norm();
    CHECK((Y - (G + D) * W).norm() >= best);
  }
}

TEST_CASE("fit_koopman: shape errors") {
  CHECK_THROWS_AS(fit_koopman(MatrixXd::Zero(3, 5), MatrixXd::Zero(3, 4), MatrixXd::Zero(1, 5)),
                  ShapeError);
  CHECK_THROWS_AS(fit_koopman(MatrixXd::Zero(3, 5), MatrixXd::Zero(3, 5), MatrixXd::Zero(1, 4)),
                  ShapeError);
}

TEST_CASE("predict_step: hand cases and fitted data") {
  const auto o = make_linear_oracle(6);
  KoopmanModel m = o.model;
  m.K.setIdentity();
  m.B.setZero();
  const ObservableVector phi = lift(m, Eigen::Vector2d(0.2, 0.4));
  CHECK(predict_step(m, phi, VectorXd::Constant(1, 3.0)).values() == phi.values());

  m.K.setZero();
  m.B = VectorXd::LinSpaced(6, 1, 6);
  CHECK(predict_step(m, phi, VectorXd::Ones(1)).values() == m.B.col(0));

  Rng rng = make_stream_rng(6, 1);
  const MatrixXd Phi = uniform_matrix(6, 40, rng), U = uniform_matrix(1, 40, rng);
  const MatrixXd Y = o.model.K * Phi + o.model.B * U;
  KoopmanModel fitted = o.model;
  const KoopmanFit f = fit_koopman(Phi, Y, U);
  fitted.K = f.K;
  fitted.B = f.B;
  for (Index j = 0; j < Phi.cols(); ++j) {
    const ObservableVector next = predict_step(fitted, ObservableVector(Phi.col(j)), U.col(j));
    CHECK((next.values() - Y.col(j)).norm() < 1e-8);
  }
}

TEST_CASE("extract_state: projection properties") {
  VectorXd v(5);
  v << 1.5, -0.2, 9.0, 8.0, 7.0;
  CHECK(extract_state(ObservableVector(v), 2) == Eigen::Vector2d(1.5, -0.2));

  Rng rng = make_stream_rng(7, 0);
  const Mlp net = init_net({2, 16, 16, 5}, Activation::tanh, rng);
  for (int i = 0; i < 100; ++i) {
    const VectorXd x = uniform_matrix(2, 1, rng, 3.0);
    CHECK(extract_state(lift(net, x), 2) == x);
    const ObservableVector phi(uniform_matrix(7, 1, rng, 3.0));
    const VectorXd s = extract_state(phi, 2);
    CHECK(extract_state(lift(net, s), 2) == s);
  }
}

TEST_CASE("rollout: empty, one step, and correction on exact data") {
  const auto o = make_linear_oracle(8);
  const Eigen::Vector2d x0(0.8, -0.4);
  const MatrixXd none = rollout(o.model, x0, MatrixXd(1, 0));
  CHECK(none.cols() == 1);
  CHECK(none.col(0) == VectorXd(x0));

  const MatrixXd u1 = MatrixXd::Constant(1, 1, 0.3);
  const MatrixXd one = rollout(o.model, x0, u1);
  CHECK(one.col(1) == extract_state(predict_step(o.model, lift(o.model, x0), u1.col(0)), 2));

  Rng rng = make_stream_rng(8, 1);
  const MatrixXd u = uniform_matrix(1, 100, rng);
  const MatrixXd a = rollout(o.model, x0, u, {.correct = true});
  const MatrixXd b = rollout(o.model, x0, u, {.correct = false});
  CHECK(a.cols() == 101);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);

  // And both follow the underlying state-space system.
  Eigen::Vector2d x = x0;
  for (Index k = 0; k < 100; ++k) x = o.A * x + o.b * u(0, k);
  CHECK((a.col(100) - x).norm() < 1e-10);
}

TEST_CASE("rollout: blow-up is reported") {
  auto o = make_linear_oracle(9);
  o.model.K *= 3.0;
  CHECK_THROWS_AS(rollout(o.model, Eigen::Vector2d(1, 1), MatrixXd::Zero(1, 100)), DivergenceError);
}

TEST_CASE("KoopmanModel: validation") {
  auto o = make_linear_oracle(10);
  CHECK_NOTHROW(o.model.validate());
  o.model.B = MatrixXd::Zero(5, 1);
  CHECK_THROWS_AS(o.model.validate(), ShapeError);
}
