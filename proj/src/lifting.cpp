#include "rldk/lifting.hpp"

#include <cmath>

#include "rldk/errors.hpp"

namespace rldk {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::identity: return z;
  }
  return z;
}

// Derivative of the activation expressed through pre-activation z and output h.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& h, Activation a) {
  switch (a) {
    case Activation::tanh: return (1.0 - h.array().square()).matrix();
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace

Mlp::Mlp(std::vector<Eigen::Index> layer_dims, Activation activation)
    : dims_(std::move(layer_dims)), activation_(activation) {
  if (dims_.size() < 2) throw DomainError("Mlp: need at least input and output widths");
  for (auto d : dims_) {
    if (d <= 0) throw DomainError("Mlp: layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) count += weights_[l].size() + biases_[l].size();
  return count;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(offset, weights_[l].size()) = weights_[l].reshaped();
    offset += weights_[l].size();
    flat.segment(offset, biases_[l].size()) = biases_[l];
    offset += biases_[l].size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw ShapeError("Mlp::set_parameters: size mismatch");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = flat.segment(offset, weights_[l].size());
    offset += weights_[l].size();
    biases_[l] = flat.segment(offset, biases_[l].size());
    offset += biases_[l].size();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw ShapeError("Mlp::forward: input rows mismatch");
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    h = (l + 1 < weights_.size()) ? activate(z, activation_) : std::move(z);
  }
  return h;
}

Mlp::Cache Mlp::forward_cached(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw ShapeError("Mlp::forward: input rows mismatch");
  Cache cache;
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cache.layer_inputs.push_back(h);
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) {
      h = activate(z, activation_);
      cache.pre_activations.push_back(std::move(z));
    } else {
      h = std::move(z);
    }
  }
  cache.output = std::move(h);
  return cache;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& upstream) const {
  if (upstream.rows() != output_dim() || upstream.cols() != cache.output.cols()) {
    throw ShapeError("Mlp::backward: upstream gradient shape mismatch");
  }
  Gradients g;
  g.parameters.resize(parameter_count());

  // Offsets of each layer's block in the flat layout.
  std::vector<Eigen::Index> offsets(weights_.size());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offsets[l] = offset;
    offset += weights_[l].size() + biases_[l].size();
  }

  Eigen::MatrixXd delta = upstream;  // d loss / d z for the current layer
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::MatrixXd dW = delta * cache.layer_inputs[l].transpose();
    g.parameters.segment(offsets[l], dW.size()) = dW.reshaped();
    g.parameters.segment(offsets[l] + dW.size(), biases_[l].size()) = delta.rowwise().sum();
    Eigen::MatrixXd dh = weights_[l].transpose() * delta;
    if (l == 0) {
      g.inputs = std::move(dh);
    } else {
      delta = dh.cwiseProduct(
          activation_grad(cache.pre_activations[l - 1], cache.layer_inputs[l], activation_));
    }
  }
  return g;
}

Mlp init_net(const std::vector<Eigen::Index>& layer_dims, Activation activation, Rng& rng) {
  Mlp net(layer_dims, activation);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weight(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Column-major fill keeps the draw order tied to the flat parameter layout.
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  }
  return net;
}

ObservableVector lift(const Mlp& net, const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw DomainError("lift: non-finite state");
  return ObservableVector(lift_batch(net, x).col(0));
}

Eigen::MatrixXd lift_batch(const Mlp& net, const Eigen::MatrixXd& X) {
  if (X.rows() != net.input_dim()) throw ShapeError("lift_batch: state dimension mismatch");
  Eigen::MatrixXd out(X.rows() + net.output_dim(), X.cols());
  out.topRows(X.rows()) = X;
  out.bottomRows(net.output_dim()) = net.forward(X);
  return out;
}

Eigen::VectorXd backprop(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != net.output_dim() || upstream.cols() != X.cols()) {
    throw ShapeError("backprop: upstream gradient must be N x cols");
  }
  return net.backward(net.forward_cached(X), upstream).parameters;
}

AdamState AdamState::fresh(Eigen::Index size, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  s.m = Eigen::VectorXd::Zero(size);
  s.v = Eigen::VectorXd::Zero(size);
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + state.epsilon);
}

}  // namespace rldk
