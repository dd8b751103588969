#include "tomsc/nn/optim.hpp"

#include <cmath>

namespace tomsc::nn {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "momentum") return OptimizerKind::momentum;
  if (name == "adam") return OptimizerKind::adam;
  fail("unknown optimizer '", name, "' (expected sgd, momentum or adam)");
}

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::adam: return "adam";
  }
  return "sgd";
}

namespace {

void check_lr(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("learning rate must be positive and finite, got ", lr);
}

}  // namespace

Optimizer::Optimizer(ParameterList params, OptimizerConfig config) : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    m_.push_back(Mat::Zero(p->rows(), p->cols()));
    v_.push_back(Mat::Zero(p->rows(), p->cols()));
  }
}

void Optimizer::step(double learning_rate) {
  check_lr(learning_rate);
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (m_[i].rows() != p.rows() || m_[i].cols() != p.cols()) {
      throw DimensionError(concat("optimizer state for '", p.name(), "' is ", m_[i].rows(), "x", m_[i].cols(),
                                  " but parameter is ", p.rows(), "x", p.cols()));
    }
    Mat g = p.grad();
    if (config_.clip > 0.0) g = g.cwiseMax(-config_.clip).cwiseMin(config_.clip);
    switch (config_.kind) {
      case OptimizerKind::sgd:
        p.apply_delta(-learning_rate * g);
        break;
      case OptimizerKind::momentum:
        m_[i] = config_.momentum * m_[i] + g;
        p.apply_delta(-learning_rate * m_[i]);
        break;
      case OptimizerKind::adam: {
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        Mat denom = ((v_[i] / c2).array().sqrt() + config_.eps).matrix();
        p.apply_delta(-learning_rate * (m_[i] / c1).cwiseQuotient(denom));
        break;
      }
    }
  }
}

void sgd_step(const ParameterList& params, const std::vector<Mat>& grads, double learning_rate) {
  check_lr(learning_rate);
  if (params.size() != grads.size()) fail("sgd_step: ", params.size(), " parameters but ", grads.size(), " gradients");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->apply_delta(-learning_rate * grads[i]);
}

}  // namespace tomsc::nn
