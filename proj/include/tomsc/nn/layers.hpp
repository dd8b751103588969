#pragma once

#include "tomsc/nn/tape.hpp"

#include <string>

namespace tomsc::nn {

enum class Activation { identity, tanh, relu, sigmoid };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// Initialization for a fresh layer. `zero` leaves every weight at 0, which
/// makes softmax heads start out uniform.
enum class Init { xavier, zero };

/// Fully connected layer y = act(W x + b) with W stored out x in.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::string name, Index in, Index out, Activation act, Init init, Rng& rng);
  DenseLayer(std::string name, Mat weights, Vec bias, Activation act);

  Index in_dim() const { return weights_.cols(); }
  Index out_dim() const { return weights_.rows(); }
  Activation activation() const { return act_; }

  /// Batch forward on the tape: x is batch x in, result is batch x out.
  Var forward(Tape& tape, const Var& x);
  /// Tape-free inference for a single input vector.
  Vec apply(const Vec& x) const;
  /// Tape-free inference for a batch (rows are samples).
  Mat apply_batch(const Mat& x) const;

  Parameter& weights() { return weights_; }
  Parameter& bias() { return bias_; }
  const Parameter& weights() const { return weights_; }
  const Parameter& bias() const { return bias_; }
  ParameterList parameters() { return {&weights_, &bias_}; }

 private:
  Parameter weights_;
  Parameter bias_;  // 1 x out
  Activation act_ = Activation::identity;
};

Var activate(const Var& x, Activation act);
Mat activate(const Mat& x, Activation act);

/// Gated recurrent cell:
///   u = sigmoid(W_u x + U_u h + b_u)      update gate
///   r = sigmoid(W_r x + U_r h + b_r)      reset gate
///   c = tanh(W_c x + r * (U_c h) + b_c)   candidate
///   h' = (1 - u) * c + u * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::string name, Index input, Index hidden, Rng& rng);

  Index input_dim() const { return wx_.cols(); }
  Index hidden_dim() const { return wx_.rows() / 3; }

  /// x is batch x input, h is batch x hidden.
  Var forward(Tape& tape, const Var& x, const Var& h);
  Vec apply(const Vec& x, const Vec& h) const;

  ParameterList parameters() { return {&wx_, &wh_, &bias_}; }

 private:
  Parameter wx_;    // 3H x input, gates stacked [u; r; c]
  Parameter wh_;    // 3H x H
  Parameter bias_;  // 1 x 3H
};

/// Stack of dense layers; the last layer's activation is whatever it was
/// built with.
class Mlp {
 public:
  Mlp() = default;
  /// `dims` = {in, hidden..., out}. Hidden layers use `hidden_act`; the output
  /// layer is identity and initialized per `out_init`.
  Mlp(const std::string& name, const std::vector<Index>& dims, Activation hidden_act, Init out_init,
      Rng& rng);

  Var forward(Tape& tape, const Var& x);
  Vec apply(const Vec& x) const;
  Mat apply_batch(const Mat& x) const;
  Index in_dim() const { return layers_.front().in_dim(); }
  Index out_dim() const { return layers_.back().out_dim(); }
  ParameterList parameters();
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace tomsc::nn
