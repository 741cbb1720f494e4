#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rldk/datagen.hpp"

namespace rldk {

enum class Activation { tanh, relu, identity };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Fully connected network. Hidden layers apply `activation`; the output
/// layer is affine. Inputs and outputs are column-batched.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialised parameters.
  Mlp(std::vector<Eigen::Index> layer_dims, Activation activation);

  const std::vector<Eigen::Index>& layer_dims() const { return dims_; }
  Activation activation() const { return activation_; }
  Eigen::Index input_dim() const { return dims_.front(); }
  Eigen::Index output_dim() const { return dims_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  Eigen::Index parameter_count() const;

  Eigen::MatrixXd& weight(std::size_t layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weight(std::size_t layer) const { return weights_[layer]; }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_[layer]; }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_[layer]; }

  /// Flat view: for each layer, W (column-major) then b.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  /// Activations retained for a backward pass.
  struct Cache {
    std::vector<Eigen::MatrixXd> layer_inputs;  // input to layer l (post-activation of l-1)
    std::vector<Eigen::MatrixXd> pre_activations;
    Eigen::MatrixXd output;
  };
  Cache forward_cached(const Eigen::MatrixXd& inputs) const;

  struct Gradients {
    Eigen::VectorXd parameters;  // same layout as parameters()
    Eigen::MatrixXd inputs;      // d loss / d inputs
  };
  /// Reverse pass for d loss / d output = upstream (output_dim x cols).
  Gradients backward(const Cache& cache, const Eigen::MatrixXd& upstream) const;

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<Eigen::Index> dims_;
  Activation activation_ = Activation::tanh;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Glorot-uniform weights, zero biases.
Mlp init_net(const std::vector<Eigen::Index>& layer_dims, Activation activation, Rng& rng);

/// Lifted coordinates [x; phi(x)]. Constructed only by lifting or by model
/// prediction so that consumers (controllers) cannot be handed a raw state.
class ObservableVector {
 public:
  ObservableVector() = default;
  explicit ObservableVector(Eigen::VectorXd values) : values_(std::move(values)) {}

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator()(Eigen::Index i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
};

/// [x; net(x)]: the first n entries are x itself.
ObservableVector lift(const Mlp& net, const Eigen::VectorXd& x);
/// Column-wise lift of an n x m state matrix into (n + N) x m.
Eigen::MatrixXd lift_batch(const Mlp& net, const Eigen::MatrixXd& X);

/// Parameter gradient for an upstream gradient on the N network rows of a
/// lift_batch output (the concatenated state rows carry no parameters).
Eigen::VectorXd backprop(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& upstream);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static AdamState fresh(Eigen::Index size, double learning_rate = 1e-3);
};

/// Bias-corrected Adam update of `params` in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state);

}  // namespace rldk

namespace rldk {

/// Autoencoder baseline decoder: maps lifted coordinates back to states.
inline Eigen::MatrixXd decoder_forward(const Mlp& decoder, const Eigen::MatrixXd& lifted) {
  return decoder.forward(lifted);
}

/// Parameter and input gradients of the decoder for d loss / d output = upstream.
inline Mlp::Gradients decoder_backprop(const Mlp& decoder, const Eigen::MatrixXd& lifted,
                                       const Eigen::MatrixXd& upstream) {
  return decoder.backward(decoder.forward_cached(lifted), upstream);
}

}  // namespace rldk
