#include "rldk/edmd.hpp"

#include <string>

#include "rldk/errors.hpp"

namespace rldk {

Eigen::MatrixXd pinv(const Eigen::MatrixXd& M, double rcond) {
  if (!M.allFinite()) throw DomainError("pinv: non-finite matrix");
  if (M.size() == 0) return Eigen::MatrixXd::Zero(M.cols(), M.rows());
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!s.allFinite()) throw NumericalError("pinv: SVD produced non-finite singular values");
  const double cutoff = rcond * (s.size() ? s(0) : 0.0);
  Eigen::VectorXd inv_s = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv_s(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

KoopmanFit fit_koopman(const Eigen::MatrixXd& Phi_x, const Eigen::MatrixXd& Phi_y,
                       const Eigen::MatrixXd& U, double rcond) {
  if (Phi_x.rows() != Phi_y.rows() || Phi_x.cols() != Phi_y.cols() || U.cols() != Phi_x.cols()) {
    throw ShapeError("fit_koopman: Phi_x, Phi_y and U must have matching shapes");
  }
  const Eigen::Index d = Phi_x.rows();
  const Eigen::Index p = U.rows();
  Eigen::MatrixXd W(d + p, Phi_x.cols());
  W << Phi_x, U;
  const Eigen::MatrixXd gram = W * W.transpose();
  const Eigen::MatrixXd KB = (Phi_y * W.transpose()) * pinv(gram, rcond);
  return {KB.leftCols(d), KB.rightCols(p)};
}

void KoopmanModel::validate() const {
  const Eigen::Index d = K.rows();
  if (K.cols() != d || B.rows() != d) throw ShapeError("KoopmanModel: K must be square, B must have K's rows");
  const Eigen::Index lifted = concatenates_state() ? net.input_dim() + net.output_dim() : net.output_dim();
  if (lifted != d) throw ShapeError("KoopmanModel: lifting dimension does not match K");
  if (decoder && (decoder->input_dim() != d || decoder->output_dim() != net.input_dim())) {
    throw ShapeError("KoopmanModel: decoder must map the lifted space back to states");
  }
  if (!K.allFinite() || !B.allFinite()) throw DomainError("KoopmanModel: non-finite K or B");
}

ObservableVector lift(const KoopmanModel& model, const Eigen::VectorXd& x) {
  if (model.concatenates_state()) return lift(model.net, x);
  if (!x.allFinite()) throw DomainError("lift: non-finite state");
  return ObservableVector(model.net.forward(x).col(0));
}

Eigen::MatrixXd lift_batch(const KoopmanModel& model, const Eigen::MatrixXd& X) {
  return model.concatenates_state() ? lift_batch(model.net, X) : model.net.forward(X);
}

ObservableVector predict_step(const KoopmanModel& model, const ObservableVector& phi,
                              const Eigen::VectorXd& u) {
  if (phi.size() != model.lifted_dim() || u.size() != model.input_dim()) {
    throw ShapeError("predict_step: dimension mismatch");
  }
  return ObservableVector(model.K * phi.values() + model.B * u);
}

Eigen::VectorXd extract_state(const ObservableVector& phi_hat, Eigen::Index n) {
  if (phi_hat.size() < n) throw ShapeError("extract_state: lifted vector shorter than state");
  return phi_hat.values().head(n);
}

Eigen::VectorXd extract_state(const KoopmanModel& model, const ObservableVector& phi_hat) {
  if (model.decoder) return model.decoder->forward(phi_hat.values()).col(0);
  return extract_state(phi_hat, model.state_dim());
}

Eigen::MatrixXd extract_states(const KoopmanModel& model, const Eigen::MatrixXd& lifted) {
  if (model.decoder) return model.decoder->forward(lifted);
  return lifted.topRows(model.state_dim());
}

Eigen::MatrixXd rollout(const KoopmanModel& model, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& u_seq, const RolloutOptions& options) {
  if (!u_seq.allFinite()) throw DomainError("rollout: non-finite input sequence");
  if (u_seq.cols() > 0 && u_seq.rows() != model.input_dim()) {
    throw ShapeError("rollout: input rows must equal the model input dimension");
  }
  const Eigen::Index steps = u_seq.cols();
  Eigen::MatrixXd states(model.state_dim(), steps + 1);
  states.col(0) = x0;

  ObservableVector phi = lift(model, x0);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const ObservableVector next = predict_step(model, phi, u_seq.col(k));
    const Eigen::VectorXd x = extract_state(model, next);
    if (!(x.norm() <= options.blowup_norm)) {
      throw DivergenceError("rollout: state norm exceeded bound at step " + std::to_string(k + 1));
    }
    states.col(k + 1) = x;
    phi = options.correct ? lift(model, x) : next;
  }
  return states;
}

}  // namespace rldk
