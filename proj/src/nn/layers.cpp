#include "tomsc/nn/layers.hpp"

#include <cmath>

namespace tomsc::nn {

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  fail("unknown activation '", name, "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

namespace {

Mat xavier(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Mat m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

}  // namespace

DenseLayer::DenseLayer(std::string name, Index in, Index out, Activation act, Init init, Rng& rng)
    : weights_(name + ".W", init == Init::zero ? Mat::Zero(out, in) : xavier(out, in, rng)),
      bias_(name + ".b", Mat::Zero(1, out)),
      act_(act) {}

DenseLayer::DenseLayer(std::string name, Mat weights, Vec bias, Activation act)
    : weights_(name + ".W", std::move(weights)), bias_(name + ".b", Mat(bias.transpose())), act_(act) {
  if (bias_.cols() != weights_.rows()) {
    throw DimensionError(concat("dense layer '", name, "': bias dimension ", bias_.cols(),
                                " does not match output dimension ", weights_.rows()));
  }
}

Var activate(const Var& x, Activation act) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::tanh: return tanh(x);
    case Activation::relu: return relu(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

Mat activate(const Mat& x, Activation act) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::tanh: return x.array().tanh();
    case Activation::relu: return x.cwiseMax(0.0);
    case Activation::sigmoid: return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  }
  return x;
}

Var DenseLayer::forward(Tape& tape, const Var& x) {
  if (x.cols() != in_dim()) {
    throw DimensionError(concat("dense layer '", weights_.name(), "': input dimension ", x.cols(),
                                " does not match layer input dimension ", in_dim()));
  }
  Var w = tape.param(weights_);
  Var b = tape.param(bias_);
  return activate(matmul_nt(x, w) + b, act_);
}

Vec DenseLayer::apply(const Vec& x) const {
  if (x.size() != in_dim()) {
    throw DimensionError(concat("dense layer '", weights_.name(), "': input dimension ", x.size(),
                                " does not match layer input dimension ", in_dim()));
  }
  Mat pre = weights_.value() * x + bias_.value().transpose();
  return activate(pre, act_).col(0);
}

Mat DenseLayer::apply_batch(const Mat& x) const {
  if (x.cols() != in_dim()) {
    throw DimensionError(concat("dense layer '", weights_.name(), "': input dimension ", x.cols(),
                                " does not match layer input dimension ", in_dim()));
  }
  Mat pre = x * weights_.value().transpose();
  pre.rowwise() += bias_.value().row(0);
  return activate(pre, act_);
}

GruCell::GruCell(std::string name, Index input, Index hidden, Rng& rng)
    : wx_(name + ".Wx", xavier(3 * hidden, input, rng)),
      wh_(name + ".Wh", xavier(3 * hidden, hidden, rng)),
      bias_(name + ".b", Mat::Zero(1, 3 * hidden)) {}

Var GruCell::forward(Tape& tape, const Var& x, const Var& h) {
  const Index H = hidden_dim();
  if (x.cols() != input_dim()) {
    throw DimensionError(concat("gru '", wx_.name(), "': input dimension ", x.cols(), " vs ", input_dim()));
  }
  if (h.cols() != H || h.rows() != x.rows()) {
    throw DimensionError(concat("gru '", wx_.name(), "': hidden state ", h.rows(), "x", h.cols(),
                                " vs expected ", x.rows(), "x", H));
  }
  Var gx = matmul_nt(x, tape.param(wx_)) + tape.param(bias_);
  Var gh = matmul_nt(h, tape.param(wh_));
  Var u = sigmoid(slice_cols(gx, 0, H) + slice_cols(gh, 0, H));
  Var r = sigmoid(slice_cols(gx, H, H) + slice_cols(gh, H, H));
  Var c = tanh(slice_cols(gx, 2 * H, H) + r * slice_cols(gh, 2 * H, H));
  Var one_minus_u = add_scalar(-u, 1.0);
  return one_minus_u * c + u * h;
}

Vec GruCell::apply(const Vec& x, const Vec& h) const {
  const Index H = hidden_dim();
  if (x.size() != input_dim() || h.size() != H) {
    throw DimensionError(concat("gru '", wx_.name(), "': got input ", x.size(), " hidden ", h.size()));
  }
  Vec gx = wx_.value() * x + bias_.value().transpose();
  Vec gh = wh_.value() * h;
  auto sig = [](const Vec& v) -> Vec { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); };
  Vec u = sig(gx.segment(0, H) + gh.segment(0, H));
  Vec r = sig(gx.segment(H, H) + gh.segment(H, H));
  Vec c = (gx.segment(2 * H, H) + r.cwiseProduct(gh.segment(2 * H, H))).array().tanh();
  return (1.0 - u.array()).matrix().cwiseProduct(c) + u.cwiseProduct(h);
}

Mlp::Mlp(const std::string& name, const std::vector<Index>& dims, Activation hidden_act, Init out_init,
         Rng& rng) {
  if (dims.size() < 2) fail("mlp '", name, "' needs at least input and output dimensions");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers_.emplace_back(concat(name, ".", i), dims[i], dims[i + 1], last ? Activation::identity : hidden_act,
                         last ? out_init : Init::xavier, rng);
  }
}

Var Mlp::forward(Tape& tape, const Var& x) {
  Var h = x;
  for (auto& l : layers_) h = l.forward(tape, h);
  return h;
}

Vec Mlp::apply(const Vec& x) const {
  Vec h = x;
  for (const auto& l : layers_) h = l.apply(h);
  return h;
}

Mat Mlp::apply_batch(const Mat& x) const {
  Mat h = x;
  for (const auto& l : layers_) h = l.apply_batch(h);
  return h;
}

ParameterList Mlp::parameters() {
  ParameterList out;
  for (auto& l : layers_) {
    for (auto* p : l.parameters()) out.push_back(p);
  }
  return out;
}

}  // namespace tomsc::nn
