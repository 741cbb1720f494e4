#include "rldk/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"
#include "rldk/model_io.hpp"
#include "rldk/svg_plot.hpp"

namespace rldk {

namespace fs = std::filesystem;

namespace {

// RNG stream for rollout inputs; far away from the per-trajectory streams.
constexpr std::uint64_t kRolloutStream = 0x726f6c6c6f7574ULL;

Eigen::Vector2d parse_x0(const std::string& text) {
  const std::vector<double> v = parse_vector(text);
  if (v.size() != 2) throw ConfigError("x0 must have two components, got '" + text + "'");
  return {v[0], v[1]};
}

fs::path rldk_model_file(const RunConfig& cfg) {
  return cfg.model_path.empty() ? cfg.out / "model_rldk.json" : fs::path(cfg.model_path);
}

fs::path report_file(const RunConfig& cfg) {
  return cfg.out / ("report_" + std::string(to_string(cfg.training.variant)) + ".csv");
}

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  return {m.row(r).begin(), m.row(r).end()};
}

Dataset obtain_dataset(const RunConfig& cfg, std::ostream& log) {
  const fs::path path = cfg.dataset_file();
  if (!fs::exists(path)) {
    log << "dataset " << path.string() << " not found; generating it\n";
    return cmd_datagen(cfg, log);
  }
  Dataset ds = load_dataset(path);
  if (!(ds.config == cfg.dataset)) {
    log << "note: using dataset parameters recorded in " << path.string()
        << " (they differ from the current configuration)\n";
  }
  return ds;
}

}  // namespace

Eigen::MatrixXd input_sequence(std::string_view policy, std::size_t steps, std::uint64_t seed) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(steps));
  if (policy == "zero") return u;
  if (policy.starts_with("const:")) {
    double v = 0.0;
    try {
      v = parse_double(policy.substr(6));
    } catch (const ParseError&) {
      throw ConfigError("u_policy: bad constant in '" + std::string(policy) + "'");
    }
    u.setConstant(v);
    return u;
  }
  Rng rng = make_stream_rng(seed, kRolloutStream);
  if (policy == "random") {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index k = 0; k < u.cols(); ++k) u(0, k) = dist(rng);
    return u;
  }
  if (policy == "bang_bang") {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index k = 0; k < u.cols(); ++k) u(0, k) = coin(rng) ? 1.0 : -1.0;
    return u;
  }
  throw ConfigError("u_policy must be zero, const:<v>, random or bang_bang, got '" +
                    std::string(policy) + "'");
}

Dataset cmd_datagen(const RunConfig& cfg, std::ostream& log) {
  Dataset ds = build_dataset(cfg.dataset);
  save_dataset(ds, cfg.dataset_file());
  const std::size_t samples = step_count(cfg.dataset.t_final, cfg.dataset.dt) + 1;
  log << "wrote " << cfg.dataset_file().string() << "\n"
      << "  trajectories: " << ds.size() << " x " << samples << " samples\n"
      << "  split: train " << ds.train.size() << ", validation " << ds.validation.size()
      << ", test " << ds.test.size() << "\n"
      << "  noise std: " << cfg.dataset.noise_std
      << ", excitation: " << to_string(cfg.dataset.excitation) << "\n";
  return ds;
}

TrainingResult cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.training.validate();
  const Dataset ds = obtain_dataset(cfg, log);
  log << "training " << to_string(cfg.training.variant) << " on " << ds.train.size()
      << " trajectories, " << cfg.training.epochs << " epochs\n";
  TrainingResult result = train(ds, cfg.training, [&](const EpochRecord& e) {
    log << "  epoch " << e.epoch << "  train " << e.train_loss << "  val " << e.val_loss << "  ("
        << e.seconds << " s)\n";
  });
  save_model(ModelFile{result.model, std::nullopt}, cfg.model_file());
  save_report(result.report, report_file(cfg));
  if (cfg.svg) {
    std::vector<double> epoch, train_loss, val_loss;
    for (const auto& e : result.report.epochs) {
      epoch.push_back(e.epoch);
      train_loss.push_back(e.train_loss);
      val_loss.push_back(e.val_loss);
    }
    write_svg_plot(cfg.out / ("loss_" + std::string(to_string(cfg.training.variant)) + ".svg"),
                   "Training loss (" + std::string(to_string(cfg.training.variant)) + ")", "epoch",
                   epoch, {{"train", train_loss}, {"validation", val_loss}});
  }
  log << "best epoch " << result.report.best_epoch << "\n"
      << "wall-clock training time: " << result.report.total_seconds << " s\n"
      << "wrote " << cfg.model_file().string() << " and " << report_file(cfg).string() << "\n";
  return result;
}

RolloutTrace cmd_rollout(const RunConfig& cfg, std::ostream& log) {
  if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
  const fs::path path = cfg.model_file();
  if (!fs::exists(path)) throw IoError("model file not found: " + path.string());
  const KoopmanModel model = load_model(path).model;
  const Eigen::Vector2d x0 = parse_x0(cfg.x0);
  const auto steps = static_cast<std::size_t>(cfg.horizon);
  const Eigen::MatrixXd u = input_sequence(cfg.u_policy, steps, cfg.dataset.seed);

  RolloutTrace tr;
  const double t_final = model.dt * static_cast<double>(steps);
  SimulationResult truth = simulate_pendulum(x0, open_loop(u), t_final, model.dt, cfg.dataset.params);
  tr.times = std::move(truth.times);
  tr.truth = std::move(truth.states);
  tr.predicted = rollout(model, x0, u, RolloutOptions{cfg.rollout_correct});
  const Eigen::MatrixXd err = (tr.predicted - tr.truth).cwiseAbs();

  CsvTable t;
  t.header = {"t", "theta_true", "thetadot_true", "theta_pred", "thetadot_pred", "abs_err_1",
              "abs_err_2"};
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    t.rows.push_back({tr.times[k], tr.truth(0, c), tr.truth(1, c), tr.predicted(0, c),
                      tr.predicted(1, c), err(0, c), err(1, c)});
  }
  write_csv_table(cfg.out / "rollout.csv", t);
  if (cfg.svg) {
    write_svg_plot(cfg.out / "rollout.svg", "Rollout from x0 = (" + cfg.x0 + ")", "t [s]", tr.times,
                   {{"theta true", row_of(tr.truth, 0)},
                    {"theta pred", row_of(tr.predicted, 0)},
                    {"theta_dot true", row_of(tr.truth, 1)},
                    {"theta_dot pred", row_of(tr.predicted, 1)}});
    write_svg_plot(cfg.out / "rollout_error.svg", "Absolute rollout error", "t [s]", tr.times,
                   {{"|theta err|", row_of(err, 0)}, {"|theta_dot err|", row_of(err, 1)}});
  }
  log << "rollout of " << steps << " steps (" << t_final << " s), policy " << cfg.u_policy
      << (cfg.rollout_correct ? ", corrected" : ", uncorrected") << "\n"
      << "  max abs error: theta " << err.row(0).maxCoeff() << ", theta_dot "
      << err.row(1).maxCoeff() << "\n"
      << "wrote " << (cfg.out / "rollout.csv").string() << "\n";
  return tr;
}

LqrRun cmd_lqr(const RunConfig& cfg, std::ostream& log) {
  const fs::path path = cfg.model_file();
  if (!fs::exists(path)) throw IoError("model file not found: " + path.string());
  ModelFile file = load_model(path);
  const KoopmanModel& model = file.model;
  const ContinuousModel cm = to_continuous(model);
  const LqrWeights w = default_weights(model.lifted_dim(), model.state_dim(), model.input_dim(),
                                       cfg.q_scale, cfg.r_scale);
  LqrRun run;
  run.gain = lqr_gain(cm, w);
  run.eigenvalues = closed_loop_eigenvalues(cm, run.gain);
  file.controller = ControllerRecord{run.gain, w};
  save_model(file, path);

  ClosedLoopOptions opts;
  opts.u_clamp = cfg.u_clamp;
  opts.reference_offset = cfg.lqr_reference_offset;
  run.trace = closed_loop_sim(model, run.gain, parse_x0(cfg.x0), cfg.lqr_t_final, model.dt,
                              cfg.dataset.params, opts);

  const SimulationResult& s = run.trace;
  CsvTable t;
  t.header = {"t", "theta", "theta_dot", "u"};
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    // The last state has no input applied after it.
    const double u = c < s.inputs.cols() ? s.inputs(0, c) : 0.0;
    t.rows.push_back({s.times[k], s.states(0, c), s.states(1, c), u});
  }
  write_csv_table(cfg.out / "lqr.csv", t);
  if (cfg.svg) {
    std::vector<double> u_row = row_of(s.inputs, 0);
    u_row.push_back(0.0);
    write_svg_plot(cfg.out / "lqr.svg", "LQR closed loop from x0 = (" + cfg.x0 + ")", "t [s]",
                   s.times,
                   {{"theta", row_of(s.states, 0)}, {"theta_dot", row_of(s.states, 1)}, {"u", u_row}});
  }
  const Eigen::Vector2d xf = s.states.col(s.states.cols() - 1);
  log << "LQR gain from " << run.gain.iterations << " Riccati steps, CARE residual "
      << run.gain.residual << "\n"
      << "  max Re(closed-loop eigenvalue): " << run.eigenvalues.real().maxCoeff() << "\n"
      << "  final state at t = " << s.times.back() << " s: theta " << xf(0) << ", theta_dot "
      << xf(1) << "\n"
      << "wrote " << (cfg.out / "lqr.csv").string() << "; gain stored in " << path.string() << "\n";
  return run;
}

Comparison cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const fs::path rldk_path = rldk_model_file(cfg), ae_path = cfg.baseline_model_file();
  for (const auto& p : {rldk_path, ae_path}) {
    if (!fs::exists(p)) throw IoError("model file not found: " + p.string());
  }
  const KoopmanModel a = load_model(rldk_path).model;
  const KoopmanModel b = load_model(ae_path).model;
  const Dataset ds = obtain_dataset(cfg, log);
  if (ds.test.empty()) throw ShapeError("compare: dataset has no test trajectories");
  const Eigen::Index n = ds.test.front().states_x.rows();
  const Eigen::Index p = ds.test.front().inputs.rows();
  for (const KoopmanModel* m : {&a, &b}) {
    if (m->state_dim() != n || m->input_dim() != p) {
      throw ShapeError("compare: model dimensions (n=" + std::to_string(m->state_dim()) +
                       ", p=" + std::to_string(m->input_dim()) + ") do not match the dataset (n=" +
                       std::to_string(n) + ", p=" + std::to_string(p) + ")");
    }
  }
  const Eigen::Index horizon = std::min<Eigen::Index>(cfg.compare_horizon, ds.test.front().size());

  Comparison c{evaluate(a, ds.test, horizon), evaluate(b, ds.test, horizon)};
  const double dt = ds.config.dt;

  CsvTable t;
  t.header = {"t", "abs_err_1_rldk", "abs_err_2_rldk", "abs_err_1_autoencoder",
              "abs_err_2_autoencoder"};
  std::vector<double> times;
  for (Eigen::Index k = 0; k <= horizon; ++k) {
    times.push_back(static_cast<double>(k) * dt);
    t.rows.push_back({times.back(), c.rldk.abs_error(0, k), c.rldk.abs_error(1, k),
                      c.autoencoder.abs_error(0, k), c.autoencoder.abs_error(1, k)});
  }
  write_csv_table(cfg.out / "compare.csv", t);

  CsvTable s;
  s.comments = {"model 0 = rldk (" + rldk_path.string() + ")",
                "model 1 = autoencoder (" + ae_path.string() + ")",
                "errors over " + std::to_string(ds.test.size()) + " test trajectories, " +
                    std::to_string(horizon) + " steps"};
  s.header = {"model", "state", "mean_abs_error", "max_abs_error", "one_step_state_mse"};
  int idx = 0;
  for (const EvaluationMetrics* m : {&c.rldk, &c.autoencoder}) {
    for (Eigen::Index i = 0; i < n; ++i) {
      s.rows.push_back({static_cast<double>(idx), static_cast<double>(i + 1),
                        m->abs_error.row(i).mean(), m->max_abs_error(i), m->one_step_state_mse});
    }
    ++idx;
  }
  write_csv_table(cfg.out / "compare_summary.csv", s);
  if (cfg.svg) {
    write_svg_plot(cfg.out / "compare.svg", "Mean absolute rollout error on the test split",
                   "t [s]", times,
                   {{"theta, rldk", row_of(c.rldk.abs_error, 0)},
                    {"theta_dot, rldk", row_of(c.rldk.abs_error, 1)},
                    {"theta, autoencoder", row_of(c.autoencoder.abs_error, 0)},
                    {"theta_dot, autoencoder", row_of(c.autoencoder.abs_error, 1)}});
  }
  log << "compared on " << ds.test.size() << " test trajectories over " << horizon << " steps\n"
      << "  mean abs error: rldk " << c.rldk.mean_abs_error << ", autoencoder "
      << c.autoencoder.mean_abs_error << "\n"
      << "  one-step state MSE: rldk " << c.rldk.one_step_state_mse << ", autoencoder "
      << c.autoencoder.one_step_state_mse << "\n"
      << "wrote " << (cfg.out / "compare.csv").string() << " and "
      << (cfg.out / "compare_summary.csv").string() << "\n";
  return c;
}

}  // namespace rldk
