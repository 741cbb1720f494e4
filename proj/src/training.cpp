#include "rldk/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"

namespace rldk {

const char* to_string(Variant v) { return v == Variant::rldk ? "rldk" : "autoencoder"; }

Variant variant_from_string(std::string_view name) {
  if (name == "rldk") return Variant::rldk;
  if (name == "autoencoder" || name == "ae") return Variant::autoencoder;
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (lifted_dim < 1) throw ConfigError("lifted_dim must be >= 1");
  for (auto h : hidden) {
    if (h < 1) throw ConfigError("hidden widths must be >= 1");
  }
  if (!(rcond >= 0.0)) throw ConfigError("rcond must be >= 0");
}

double prediction_loss(const Eigen::MatrixXd& Phi_hat, const Eigen::MatrixXd& Phi_true) {
  if (Phi_hat.rows() != Phi_true.rows() || Phi_hat.cols() != Phi_true.cols()) {
    throw ShapeError("prediction_loss: shape mismatch");
  }
  if (Phi_hat.cols() == 0) return 0.0;
  return (Phi_hat - Phi_true).squaredNorm() / static_cast<double>(Phi_hat.cols());
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n_trajectories,
                                                   std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ConfigError("make_batches: batch_size must be >= 1");
  std::vector<std::size_t> order(n_trajectories);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_trajectories; start += batch_size) {
    const auto end = std::min(n_trajectories, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

KoopmanModel fit_model(const Mlp& net, std::optional<Mlp> decoder,
                       const std::vector<Trajectory>& trajs, double rcond) {
  return fit_model(net, std::move(decoder), snapshot_matrices(trajs), trajs.front().dt, rcond);
}

KoopmanModel fit_model(const Mlp& net, std::optional<Mlp> decoder, const SnapshotSet& s,
                       double dt, double rcond) {
  KoopmanModel model;
  model.net = net;
  model.decoder = std::move(decoder);
  model.dt = dt;
  const KoopmanFit fit = fit_koopman(lift_batch(model, s.X), lift_batch(model, s.Xp), s.U, rcond);
  model.K = fit.K;
  model.B = fit.B;
  return model;
}

namespace {

using Clock = std::chrono::steady_clock;

// Pooled columns of the training split with per-trajectory offsets, so a
// batch is assembled by copying contiguous column blocks.
struct PooledSplit {
  SnapshotSet data;
  std::vector<Eigen::Index> offset;
  std::vector<Eigen::Index> length;

  explicit PooledSplit(const std::vector<Trajectory>& trajs) : data(snapshot_matrices(trajs)) {
    Eigen::Index o = 0;
    for (const auto& t : trajs) {
      offset.push_back(o);
      length.push_back(t.size());
      o += t.size();
    }
  }

  SnapshotSet gather(const std::vector<std::size_t>& ids) const {
    Eigen::Index cols = 0;
    for (auto i : ids) cols += length[i];
    SnapshotSet b{Eigen::MatrixXd(data.X.rows(), cols), Eigen::MatrixXd(data.Xp.rows(), cols),
                  Eigen::MatrixXd(data.U.rows(), cols)};
    Eigen::Index at = 0;
    for (auto i : ids) {
      b.X.middleCols(at, length[i]) = data.X.middleCols(offset[i], length[i]);
      b.Xp.middleCols(at, length[i]) = data.Xp.middleCols(offset[i], length[i]);
      b.U.middleCols(at, length[i]) = data.U.middleCols(offset[i], length[i]);
      at += length[i];
    }
    return b;
  }
};

struct StepResult {
  double loss;
  Eigen::VectorXd grad;
};

class RldkLearner {
 public:
  RldkLearner(Mlp net, double rcond) : net_(std::move(net)), rcond_(rcond) {}

  Eigen::VectorXd parameters() const { return net_.parameters(); }
  void set_parameters(const Eigen::VectorXd& p) { net_.set_parameters(p); }

  StepResult step(const SnapshotSet& b) const {
    const Eigen::Index n = b.X.rows();
    const auto cx = net_.forward_cached(b.X);
    const auto cy = net_.forward_cached(b.Xp);
    Eigen::MatrixXd phi_x(n + net_.output_dim(), b.X.cols());
    Eigen::MatrixXd phi_y(phi_x.rows(), phi_x.cols());
    phi_x << b.X, cx.output;
    phi_y << b.Xp, cy.output;

    // K and B are constants of the backward pass.
    const KoopmanFit fit = fit_koopman(phi_x, phi_y, b.U, rcond_);
    const Eigen::MatrixXd err = fit.K * phi_x + fit.B * b.U - phi_y;
    const double nd = static_cast<double>(b.X.cols());
    const double loss = err.squaredNorm() / nd;

    const Eigen::MatrixXd g_x = (2.0 / nd) * (fit.K.transpose() * err);
    const Eigen::MatrixXd g_y = (-2.0 / nd) * err;
    Eigen::VectorXd grad = net_.backward(cx, g_x.bottomRows(net_.output_dim())).parameters;
    grad += net_.backward(cy, g_y.bottomRows(net_.output_dim())).parameters;
    return {loss, std::move(grad)};
  }

  KoopmanModel fit(const SnapshotSet& s, double dt) const {
    return fit_model(net_, std::nullopt, s, dt, rcond_);
  }

  double loss(const KoopmanModel& model, const SnapshotSet& s) const {
    const Eigen::MatrixXd phi_x = lift_batch(model, s.X);
    const Eigen::MatrixXd phi_y = lift_batch(model, s.Xp);
    return prediction_loss(model.K * phi_x + model.B * s.U, phi_y);
  }

 private:
  Mlp net_;
  double rcond_;
};

class AutoencoderLearner {
 public:
  AutoencoderLearner(Mlp encoder, Mlp decoder, const TrainingConfig& cfg)
      : enc_(std::move(encoder)), dec_(std::move(decoder)), cfg_(cfg) {}

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd p(enc_.parameter_count() + dec_.parameter_count());
    p << enc_.parameters(), dec_.parameters();
    return p;
  }
  void set_parameters(const Eigen::VectorXd& p) {
    enc_.set_parameters(p.head(enc_.parameter_count()));
    dec_.set_parameters(p.tail(dec_.parameter_count()));
  }

  StepResult step(const SnapshotSet& b) const {
    const auto cx = enc_.forward_cached(b.X);
    const auto cy = enc_.forward_cached(b.Xp);
    const Eigen::MatrixXd& phi_x = cx.output;
    const Eigen::MatrixXd& phi_y = cy.output;

    const KoopmanFit fit = fit_koopman(phi_x, phi_y, b.U, cfg_.rcond);
    const Eigen::MatrixXd err = fit.K * phi_x + fit.B * b.U - phi_y;
    const auto cd = dec_.forward_cached(phi_x);
    const Eigen::MatrixXd recon = cd.output - b.X;
    const double nd = static_cast<double>(b.X.cols());
    const double loss = cfg_.pred_weight * err.squaredNorm() / nd +
                        cfg_.recon_weight * recon.squaredNorm() / nd;

    const auto dg = dec_.backward(cd, (2.0 * cfg_.recon_weight / nd) * recon);
    Eigen::MatrixXd g_x = (2.0 * cfg_.pred_weight / nd) * (fit.K.transpose() * err);
    g_x += dg.inputs;
    const Eigen::MatrixXd g_y = (-2.0 * cfg_.pred_weight / nd) * err;

    Eigen::VectorXd grad(enc_.parameter_count() + dec_.parameter_count());
    grad << enc_.backward(cx, g_x).parameters + enc_.backward(cy, g_y).parameters, dg.parameters;
    return {loss, std::move(grad)};
  }

  KoopmanModel fit(const SnapshotSet& s, double dt) const {
    return fit_model(enc_, dec_, s, dt, cfg_.rcond);
  }

  double loss(const KoopmanModel& model, const SnapshotSet& s) const {
    const Eigen::MatrixXd phi_x = lift_batch(model, s.X);
    const Eigen::MatrixXd phi_y = lift_batch(model, s.Xp);
    const double pred = prediction_loss(model.K * phi_x + model.B * s.U, phi_y);
    const double recon = prediction_loss(extract_states(model, phi_x), s.X);
    return cfg_.pred_weight * pred + cfg_.recon_weight * recon;
  }

 private:
  Mlp enc_;
  Mlp dec_;
  TrainingConfig cfg_;
};

template <typename Learner>
TrainingResult run_training(Learner learner, const Dataset& dataset, const TrainingConfig& config,
                            Rng& rng, const EpochCallback& on_epoch) {
  if (dataset.train.empty()) throw DomainError("train: dataset has no training trajectories");
  const auto start = Clock::now();
  const PooledSplit pooled(dataset.train);
  const bool have_val = !dataset.validation.empty();
  const SnapshotSet val = snapshot_matrices(have_val ? dataset.validation : dataset.train);

  Eigen::VectorXd params = learner.parameters();
  AdamState adam = AdamState::fresh(params.size(), config.learning_rate);

  TrainingResult result;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    const auto batches = make_batches(dataset.train.size(), config.batch_size, rng);
    double loss_sum = 0.0;
    Eigen::Index cols = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const SnapshotSet batch = pooled.gather(batches[bi]);
      StepResult r = learner.step(batch);
      if (!std::isfinite(r.loss) || !r.grad.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << bi << " (loss " << r.loss
            << ", parameter norm " << params.norm() << ", gradient norm " << r.grad.norm() << ")";
        throw TrainingError(msg.str());
      }
      loss_sum += r.loss * static_cast<double>(batch.X.cols());
      cols += batch.X.cols();
      adam_step(params, r.grad, adam);
      learner.set_parameters(params);
    }

    KoopmanModel model = learner.fit(pooled.data, dataset.train.front().dt);
    const double val_loss = learner.loss(model, val);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(cols);
    rec.val_loss = val_loss;
    rec.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    if (!std::isfinite(val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      result.model = std::move(model);
      result.report.best_epoch = epoch;
    }
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.report.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

std::vector<Eigen::Index> layer_dims(Eigen::Index in, const std::vector<Eigen::Index>& hidden,
                                     Eigen::Index out) {
  std::vector<Eigen::Index> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

Eigen::Index state_dim_of(const Dataset& ds) {
  if (ds.train.empty()) throw DomainError("train: dataset has no training trajectories");
  return ds.train.front().states_x.rows();
}

}  // namespace

TrainingResult train_rldk(const Dataset& dataset, const TrainingConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  const Eigen::Index n = state_dim_of(dataset);
  Rng rng = make_stream_rng(config.seed, 0);
  Mlp net = init_net(layer_dims(n, config.hidden, config.lifted_dim), config.activation, rng);
  return run_training(RldkLearner(std::move(net), config.rcond), dataset, config, rng, on_epoch);
}

TrainingResult train_autoencoder(const Dataset& dataset, const TrainingConfig& config,
                                 const EpochCallback& on_epoch) {
  config.validate();
  const Eigen::Index n = state_dim_of(dataset);
  // Same total lifted dimension as the concatenating model.
  const Eigen::Index latent = n + config.lifted_dim;
  std::vector<Eigen::Index> reversed(config.hidden.rbegin(), config.hidden.rend());
  Rng rng = make_stream_rng(config.seed, 0);
  Mlp encoder = init_net(layer_dims(n, config.hidden, latent), config.activation, rng);
  Mlp decoder = init_net(layer_dims(latent, reversed, n), config.activation, rng);
  return run_training(AutoencoderLearner(std::move(encoder), std::move(decoder), config), dataset,
                      config, rng, on_epoch);
}

TrainingResult train(const Dataset& dataset, const TrainingConfig& config,
                     const EpochCallback& on_epoch) {
  return config.variant == Variant::rldk ? train_rldk(dataset, config, on_epoch)
                                         : train_autoencoder(dataset, config, on_epoch);
}

EvaluationMetrics evaluate(const KoopmanModel& model, const std::vector<Trajectory>& trajectories,
                           Eigen::Index horizon) {
  if (trajectories.empty()) throw DomainError("evaluate: no trajectories");
  if (horizon < 1) throw DomainError("evaluate: horizon must be >= 1");
  for (const auto& t : trajectories) {
    if (t.size() < horizon) throw DomainError("evaluate: horizon exceeds available ground truth");
  }
  EvaluationMetrics m;
  const SnapshotSet s = snapshot_matrices(trajectories);
  const Eigen::MatrixXd phi_hat = model.K * lift_batch(model, s.X) + model.B * s.U;
  m.one_step_lifted_mse = prediction_loss(phi_hat, lift_batch(model, s.Xp));
  m.one_step_state_mse = prediction_loss(extract_states(model, phi_hat), s.Xp);

  const Eigen::Index n = model.state_dim();
  m.abs_error = Eigen::MatrixXd::Zero(n, horizon + 1);
  m.max_abs_error = Eigen::VectorXd::Zero(n);
  for (const auto& t : trajectories) {
    const Eigen::MatrixXd pred = rollout(model, t.states_x.col(0), t.inputs.leftCols(horizon));
    Eigen::MatrixXd truth(n, horizon + 1);
    truth << t.states_x.col(0), t.states_y.leftCols(horizon);
    const Eigen::MatrixXd err = (pred - truth).cwiseAbs();
    m.abs_error += err;
    m.max_abs_error = m.max_abs_error.cwiseMax(err.rowwise().maxCoeff());
  }
  m.abs_error /= static_cast<double>(trajectories.size());
  m.mean_abs_error = m.abs_error.mean();
  return m;
}

void save_report(const TrainingReport& report, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"epoch", "train_loss", "val_loss", "seconds"};
  for (const auto& e : report.epochs) {
    t.rows.push_back({static_cast<double>(e.epoch), e.train_loss, e.val_loss, e.seconds});
  }
  write_csv_table(path, t);
}

TrainingReport load_report(const std::filesystem::path& path) {
  const CsvTable t = read_csv_table(path);
  const auto ep = t.column("epoch"), tr = t.column("train_loss"), va = t.column("val_loss"),
             se = t.column("seconds");
  TrainingReport r;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : t.rows) {
    EpochRecord e{static_cast<int>(row[ep]), row[tr], row[va], row[se]};
    if (e.val_loss < best) {
      best = e.val_loss;
      r.best_epoch = e.epoch;
    }
    r.total_seconds += e.seconds;
    r.epochs.push_back(e);
  }
  return r;
}

}  // namespace rldk
