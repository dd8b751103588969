#include "tomsc/agents/objective.hpp"

#include <cmath>

namespace tomsc::agents {

void P2Config::validate() const {
  if (lambda < 0.0) fail("receiver objective: lambda must be nonnegative, got ", lambda);
  reliability.validate();
}

namespace {

void check_shapes(Index prow, Index pcol, const Mat& ideal, Index drows) {
  if (prow != ideal.rows() || pcol != ideal.cols()) {
    throw DimensionError(concat("receiver objective: policy ", prow, "x", pcol, " vs ideal ", ideal.rows(), "x",
                                ideal.cols()));
  }
  if (prow < 1 || drows < 1) fail("receiver objective: empty batch");
}

}  // namespace

nn::Var receiver_objective(const nn::Var& log_policy, const Mat& ideal, const nn::Var& distortion,
                           const P2Config& config) {
  config.validate();
  check_shapes(log_policy.rows(), log_policy.cols(), ideal, distortion.rows());
  nn::Tape& tape = log_policy.tape();
  const double rows = static_cast<double>(ideal.rows());
  nn::Var ce = nn::scale(nn::sum(tape.constant(ideal) * log_policy), -1.0 / rows);
  if (config.lambda == 0.0) return ce;
  const double k = config.kappa();
  nn::Var soft = nn::sigmoid(nn::add_scalar(nn::scale(distortion, -1.0 / k), config.reliability.delta / k));
  nn::Var gap = nn::add_scalar(-nn::mean(soft), 1.0 - config.reliability.epsilon);
  return ce + nn::scale(gap, config.lambda);
}

double receiver_objective(const Mat& policy, const Mat& ideal, const Vec& distortion, const P2Config& config) {
  config.validate();
  check_shapes(policy.rows(), policy.cols(), ideal, distortion.size());
  double ce = 0.0;
  for (Index r = 0; r < ideal.rows(); ++r) {
    for (Index a = 0; a < ideal.cols(); ++a) {
      if (ideal(r, a) > 0.0) ce -= ideal(r, a) * std::log(std::max(policy(r, a), 1e-300));
    }
  }
  ce /= static_cast<double>(ideal.rows());
  const double k = config.kappa();
  double soft = 0.0;
  for (Index i = 0; i < distortion.size(); ++i) {
    soft += 1.0 / (1.0 + std::exp(-(config.reliability.delta - distortion[i]) / k));
  }
  soft /= static_cast<double>(distortion.size());
  return ce + config.lambda * ((1.0 - config.reliability.epsilon) - soft);
}

}  // namespace tomsc::agents
