#pragma once

#include "tomsc/nn/parameter.hpp"

#include <string>
#include <vector>

namespace tomsc::nn {

enum class OptimizerKind { sgd, momentum, adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind k);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Per-element gradient clip; 0 disables.
  double clip = 0.0;
};

/// Applies p <- p - lr * g (or the momentum / Adam variant) over a fixed
/// parameter list. The list is bound at construction so moment state lines up.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(ParameterList params, OptimizerConfig config);

  /// Uses each parameter's accumulated grad, then leaves grads untouched.
  void step(double learning_rate);
  void zero_grad() { zero_grads(params_); }
  const ParameterList& parameters() const { return params_; }
  const OptimizerConfig& config() const { return config_; }
  long steps() const { return t_; }

 private:
  ParameterList params_;
  OptimizerConfig config_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  long t_ = 0;
};

/// Stateless plain gradient step with explicit gradients.
void sgd_step(const ParameterList& params, const std::vector<Mat>& grads, double learning_rate);

}  // namespace tomsc::nn
