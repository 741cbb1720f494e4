// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "linear_oracle.hpp"
#include "rldk/commands.hpp"
#include "rldk/control.hpp"
#include "rldk/csv.hpp"
#include "rldk/datagen.hpp"
#include "rldk/dynamics.hpp"
#include "rldk/edmd.hpp"
#include "rldk/lifting.hpp"
#include "rldk/training.hpp"

using namespace rldk;
using rldk::testing::make_linear_oracle;
using rldk::testing::uniform_matrix;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int criterion, const std::string& title, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << criterion << " (" << title
            << "): " << v.detail << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// --- criterion 1 -----------------------------------------------------------

Verdict projection_identity() {
  const auto t0 = Clock::now();
  Rng rng = make_stream_rng(101, 0);
  long mismatches = 0;
  for (int n = 0; n < 10; ++n) {
    const Mlp net = init_net({2, 32, 32, 8}, Activation::tanh, rng);
    const MatrixXd X = uniform_matrix(2, 10000, rng, 10.0);
    const MatrixXd L = lift_batch(net, X);
    for (Index j = 0; j < X.cols(); ++j) {
      if (extract_state(ObservableVector(L.col(j)), 2) != X.col(j)) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 5.0,
          std::to_string(mismatches) + " mismatches in 10 nets x 10^4 states, " + fmt(secs) + " s (< 5 s)"};
}

// --- criterion 2 -----------------------------------------------------------

Verdict linear_oracle() {
  const auto t0 = Clock::now();
  const auto o = make_linear_oracle(202);
  Rng rng = make_stream_rng(202, 1);
  // 5 lifted trajectories of 100 transitions from generic lifted states.
  MatrixXd Phi(6, 500), Y(6, 500), U(1, 500);
  for (int traj = 0; traj < 5; ++traj) {
    VectorXd phi = uniform_matrix(6, 1, rng, 2.0);
    for (int k = 0; k < 100; ++k) {
      const Index c = traj * 100 + k;
      U(0, c) = uniform_matrix(1, 1, rng)(0, 0);
      Phi.col(c) = phi;
      phi = o.model.K * phi + o.model.B * U.col(c);
      Y.col(c) = phi;
    }
  }
  const KoopmanFit fit = fit_koopman(Phi, Y, U);
  MatrixXd truth(6, 7), got(6, 7);
  truth << o.model.K, o.model.B;
  got << fit.K, fit.B;
  const double rel = (got - truth).norm() / truth.norm();

  KoopmanModel fitted = o.model;
  fitted.K = fit.K;
  fitted.B = fit.B;
  const MatrixXd u = uniform_matrix(1, 100, rng);
  const MatrixXd a = rollout(fitted, Eigen::Vector2d(1.2, -0.7), u, {.correct = true});
  const MatrixXd b = rollout(fitted, Eigen::Vector2d(1.2, -0.7), u, {.correct = false});
  const double gap = (a - b).cwiseAbs().maxCoeff();
  const double secs = seconds_since(t0);
  return {rel < 1e-8 && gap < 1e-8 && secs < 5.0,
          "[K B] relative error " + fmt(rel) + " (< 1e-8), corrected vs uncorrected " + fmt(gap) +
              " (< 1e-8), " + fmt(secs) + " s (< 5 s)"};
}

// --- criterion 3 -----------------------------------------------------------

Verdict gradient_check() {
  const auto t0 = Clock::now();
  Rng rng = make_stream_rng(303, 0);
  const std::vector<std::vector<Index>> shapes{{2, 4, 2}, {2, 8, 4}, {2, 8, 8, 4}};
  const double h = 1e-5;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    Mlp net = init_net(shapes[probe % shapes.size()], Activation::tanh, rng);
    VectorXd theta = net.parameters();
    theta += 0.2 * uniform_matrix(theta.size(), 1, rng);
    net.set_parameters(theta);
    const MatrixXd X = uniform_matrix(2, 4, rng, 2.0);
    const MatrixXd G = uniform_matrix(net.output_dim(), 4, rng);
    const VectorXd analytic = backprop(net, X, G);
    for (Index i = 0; i < theta.size(); ++i) {
      VectorXd tp = theta, tm = theta;
      tp(i) += h;
      tm(i) -= h;
      net.set_parameters(tp);
      const double lp = G.cwiseProduct(net.forward(X)).sum();
      net.set_parameters(tm);
      const double lm = G.cwiseProduct(net.forward(X)).sum();
      const double fd = (lp - lm) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(analytic(i)), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic(i)) / denom);
    }
    net.set_parameters(theta);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          "max relative error " + fmt(worst) + " over 100 probes (< 1e-4), " + fmt(secs) + " s (< 10 s)"};
}

// --- criterion 4 -----------------------------------------------------------

Verdict rk4_order() {
  const auto end_state = [](double dt) {
    return Eigen::Vector2d(simulate_pendulum({1, 0}, zero_input(1), 1.0, dt, {}).states.rightCols(1));
  };
  const Eigen::Vector2d ref = end_state(0.000625);
  const double e1 = (end_state(0.04) - ref).norm();
  const double e2 = (end_state(0.02) - ref).norm();
  const double e3 = (end_state(0.01) - ref).norm();
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  const bool ok = p1 >= 3.9 && p1 <= 4.1 && p2 >= 3.9 && p2 <= 4.1;
  return {ok, "orders " + fmt(p1) + " (0.04->0.02), " + fmt(p2) + " (0.02->0.01), required [3.9, 4.1]"};
}

// --- criteria 5 to 8 share the desk-scale run -------------------------------

struct DeskRun {
  Dataset dataset;
  TrainingResult rldk;
  TrainingResult autoencoder;
};

DeskRun& desk_run() {
  static DeskRun run = [] {
    DatasetConfig dc;
    dc.n_ic = 1000;
    DeskRun r;
    r.dataset = build_dataset(dc);
    TrainingConfig tc;  // 20 epochs, batch 256, lr 1e-3, [2,32,32,8]
    r.rldk = train_rldk(r.dataset, tc);
    tc.variant = Variant::autoencoder;
    r.autoencoder = train_autoencoder(r.dataset, tc);
    return r;
  }();
  return run;
}

Verdict desk_training() {
  const DeskRun& r = desk_run();
  const auto& epochs = r.rldk.report.epochs;
  const double first = epochs.front().train_loss, last = epochs.back().train_loss;
  const double ratio = last / first;
  const double mse = evaluate(r.rldk.model, r.dataset.test, 1).one_step_state_mse;
  const double secs = r.rldk.report.total_seconds;
  const bool a = ratio < 0.5, b = mse < 1e-3, t = secs < 600.0;
  return {a && b && t,
          std::string("(a) ") + (a ? "PASS" : "FAIL") + " final/first training loss " + fmt(last) + "/" +
              fmt(first) + " = " + fmt(ratio) + " (< 0.5); (b) " + (b ? "PASS" : "FAIL") +
              " one-step test state MSE " + fmt(mse) + " (< 1e-3); training " + fmt(secs) + " s (< 600 s)"};
}

Verdict long_rollout() {
  const DeskRun& r = desk_run();
  double worst_theta = 0.0, worst_norm = 0.0;
  int used = 0;
  for (const auto& t : r.dataset.test) {
    const Eigen::Vector2d x0 = t.states_x.col(0);
    if (std::abs(x0(0)) > 1.5) continue;
    const MatrixXd truth = simulate_pendulum(x0, zero_input(1), 10.0, 0.01, {}).states;
    const MatrixXd pred = rollout(r.rldk.model, x0, MatrixXd::Zero(1, truth.cols() - 1));
    worst_theta = std::max(worst_theta, (pred.row(0) - truth.row(0)).cwiseAbs().maxCoeff());
    worst_norm = std::max(worst_norm, pred.colwise().norm().maxCoeff());
    if (++used == 5) break;
  }
  return {used == 5 && worst_theta < 0.3 && worst_norm < 10.0,
          "max |theta error| over 10 s " + fmt(worst_theta) + " rad (< 0.3) on " + std::to_string(used) +
              " test ICs, max ||x|| " + fmt(worst_norm) + " (< 10)"};
}

Verdict lqr_regulation() {
  const KoopmanModel& m = desk_run().rldk.model;
  const ContinuousModel cm = to_continuous(m);
  const LqrGain g = lqr_gain(cm, default_weights(m.lifted_dim(), 2, 1));
  const double max_re = closed_loop_eigenvalues(cm, g).real().maxCoeff();
  const SimulationResult s = closed_loop_sim(m, g, {1.0, 0.0}, 10.0, m.dt, {});
  const Eigen::Vector2d xf = s.states.rightCols(1);
  const bool ok = std::abs(xf(0)) < 0.05 && std::abs(xf(1)) < 0.05 && g.residual < 1e-7 && max_re < 0.0;
  return {ok, "x(10 s) = (" + fmt(xf(0)) + ", " + fmt(xf(1)) + ") (|.| < 0.05), CARE residual " +
                  fmt(g.residual) + " (< 1e-7), max Re(eig) " + fmt(max_re) + " (< 0)"};
}

Verdict baseline_comparison() {
  const DeskRun& r = desk_run();
  const double t_rldk = r.rldk.report.total_seconds, t_ae = r.autoencoder.report.total_seconds;
  const Index horizon = r.dataset.test.front().size();
  const double e_rldk = evaluate(r.rldk.model, r.dataset.test, horizon).mean_abs_error;
  const double e_ae = evaluate(r.autoencoder.model, r.dataset.test, horizon).mean_abs_error;
  const bool a = t_rldk < t_ae, b = e_rldk <= e_ae;
  return {a && b, std::string("(a) ") + (a ? "PASS" : "FAIL") + " training time rldk " + fmt(t_rldk) +
                      " s vs autoencoder " + fmt(t_ae) + " s; (b) " + (b ? "PASS" : "FAIL") +
                      " mean abs rollout error over " + std::to_string(horizon) + " steps rldk " +
                      fmt(e_rldk) + " vs autoencoder " + fmt(e_ae)};
}

// --- criterion 9 -----------------------------------------------------------

// Report CSV with the wall-clock column dropped.
std::string without_timing(const fs::path& report) {
  CsvTable t = read_csv_table(report);
  const std::size_t col = t.column("seconds");
  t.header.erase(t.header.begin() + static_cast<std::ptrdiff_t>(col));
  for (auto& row : t.rows) row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
  std::ostringstream os;
  for (const auto& h : t.header) os << h << ',';
  for (const auto& row : t.rows) {
    os << '\n';
    for (double v : row) os << format_double(v) << ',';
  }
  return os.str();
}

Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / "rldk_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    RunConfig cfg;
    cfg.out = base / run;
    cfg.dataset.n_ic = 60;
    cfg.training.epochs = 3;
    cfg.training.batch_size = 16;
    cfg.dataset.seed = cfg.training.seed = 1234;
    cfg.horizon = 300;
    cfg.u_policy = "random";
    cmd_datagen(cfg, log);
    cmd_train(cfg, log);
    cmd_rollout(cfg, log);
  }
  const auto same = [&](const std::string& name) {
    return read_text_file(base / "a" / name) == read_text_file(base / "b" / name);
  };
  const bool data = same("dataset.csv"), rollout_csv = same("rollout.csv");
  const bool report_csv = without_timing(base / "a" / "report_rldk.csv") ==
                          without_timing(base / "b" / "report_rldk.csv");
  fs::remove_all(base);
  return {data && report_csv && rollout_csv,
          std::string("dataset.csv ") + (data ? "identical" : "DIFFERS") + ", report_rldk.csv " +
              (report_csv ? "identical" : "DIFFERS") + " (seconds column excluded), rollout.csv " +
              (rollout_csv ? "identical" : "DIFFERS")};
}

// --- criterion 10 ----------------------------------------------------------

Verdict lqr_analytic() {
  const ContinuousModel integrator{MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1), 0.0};
  const LqrGain g1 = lqr_gain(integrator, {MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)});
  MatrixXd A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  const LqrGain g2 = lqr_gain({A, B, 0.0}, {MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1)});
  const double e1 = std::abs(g1.K_lqr(0, 0) - 1.0);
  const double e2 = std::max(std::abs(g2.K_lqr(0, 0) - 1.0), std::abs(g2.K_lqr(0, 1) - std::sqrt(3.0)));
  return {e1 < 1e-6 && e2 < 1e-6,
          "scalar integrator gain error " + fmt(e1) + ", double integrator gain error " + fmt(e2) +
              " (< 1e-6)"};
}

}  // namespace

int main() {
  report(1, "projection identity", projection_identity);
  report(2, "linear-system oracle", linear_oracle);
  report(3, "gradient check", gradient_check);
  report(4, "RK4 order", rk4_order);
  report(5, "desk-scale training", desk_training);
  report(6, "10 s corrected rollout", long_rollout);
  report(7, "LQR regulation", lqr_regulation);
  report(8, "baseline comparison", baseline_comparison);
  report(9, "determinism", determinism);
  report(10, "LQR analytic cases", lqr_analytic);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + (failures == 1 ? " criterion fails" : " criteria fail"))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
